"""Bivariate tail sample construction and correlation-based feasibility checks."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .decluster import ClusterArrays
from .errors import DomainError

DEFAULT_M = 1000
INDEPENDENCE_CRITICAL = 0.05


@dataclass(frozen=True)
class JointTailSample:
    """One (x, y) pair of per-window deepest minima for each qualifying window."""

    x: np.ndarray
    y: np.ndarray
    window: np.ndarray
    u_x: float
    u_y: float
    M: int

    def __len__(self) -> int:
        return int(self.x.size)

    @property
    def pairs(self) -> list[tuple[float, float, int]]:
        return [(float(a), float(b), int(w)) for a, b, w in zip(self.x, self.y, self.window)]


def _as_columns(minima) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(minima, ClusterArrays):
        return np.asarray(minima.min_index, dtype=np.int64), np.asarray(minima.minimum, dtype=float)
    arr = list(minima)
    if not arr:
        return np.empty(0, dtype=np.int64), np.empty(0)
    tt, vv = zip(*arr)
    return np.asarray(tt, dtype=np.int64), np.asarray(vv, dtype=float)


def _window_minima(t_idx, values, u, M):
    keep = values < u
    w = t_idx[keep] // M
    v = values[keep]
    if w.size == 0:
        return w, v
    order = np.lexsort((v, w))
    w, v = w[order], v[order]
    first = np.concatenate([[True], w[1:] != w[:-1]])
    return w[first], v[first]


def align_joint_exceedances(minima_x, minima_y, u_x: float, u_y: float,
                            M: int = DEFAULT_M) -> JointTailSample:
    """Pair the deepest cluster minima of the two receivers window by window.

    ``minima_x`` and ``minima_y`` are either :class:`ClusterArrays` or
    sequences of ``(time step, dBm)``. Windows are ``t // M``; a window
    contributes only when both receivers have a minimum below threshold in it.
    """
    if M < 1:
        raise DomainError(f"window length must be >= 1, got {M}")
    wx, vx = _window_minima(*_as_columns(minima_x), u_x, M)
    wy, vy = _window_minima(*_as_columns(minima_y), u_y, M)
    common, ix, iy = np.intersect1d(wx, wy, assume_unique=True, return_indices=True)
    return JointTailSample(vx[ix], vy[iy], common.astype(np.int64), float(u_x), float(u_y), int(M))


def pearson_correlation(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise DomainError("need two equal-length sequences of at least 2 values")
    da, db = a - a.mean(), b - b.mean()
    saa, sbb = float(da @ da), float(db @ db)
    if saa == 0 or sbb == 0:
        raise DomainError("zero variance")
    return float(np.clip((da @ db) / math.sqrt(saa * sbb), -1.0, 1.0))


class Diversity(enum.Enum):
    SUGGESTED = "Suggested"
    POINTLESS = "Pointless"
    INDEPENDENT_LINKS = "IndependentLinks"


@dataclass(frozen=True)
class DiversityDecision:
    decision: Diversity
    rationale: str


def spatial_diversity_feasible(rho_total: float) -> DiversityDecision:
    """Classify whole-sample correlation into a diversity recommendation.

    Bands: below 0.1, 0.1 to 0.5 inclusive, above 0.5.
    """
    if not abs(rho_total) <= 1.0:
        raise DomainError(f"correlation must lie in [-1, 1], got {rho_total}")
    if rho_total > 0.5:
        return DiversityDecision(Diversity.POINTLESS,
                                 f"rho={rho_total:.4g} > 0.5: links fade together, diversity gains little")
    if rho_total >= 0.1:
        return DiversityDecision(Diversity.SUGGESTED,
                                 f"0.1 <= rho={rho_total:.4g} <= 0.5: weakly correlated, diversity helps")
    return DiversityDecision(Diversity.INDEPENDENT_LINKS,
                             f"rho={rho_total:.4g} < 0.1: links are effectively independent")


def tail_dependence_needed(rho_tail: float, critical: float = INDEPENDENCE_CRITICAL) -> bool:
    """True when the tail correlation is strictly beyond the independence critical value."""
    return bool(abs(rho_tail) > critical)
