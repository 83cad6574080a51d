"""Point-process bivariate model built on an empirical angular measure."""

from __future__ import annotations

import typing as t
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InsufficientData

MIN_RETAINED = 30
KERNEL_BANDWIDTH = 0.05
_MERGE_TOL = 1e-12


@dataclass(frozen=True)
class AngularMeasure:
    """Discrete probability measure on [0, 1]."""

    omega: np.ndarray
    mass: np.ndarray
    r0: float = float("nan")
    symmetrized: bool = False

    def __post_init__(self):
        om = np.asarray(self.omega, dtype=float)
        ms = np.asarray(self.mass, dtype=float)
        if om.shape != ms.shape or om.ndim != 1 or om.size == 0:
            raise DomainError("omega and mass must be nonempty 1-d arrays of equal length")
        if np.any(om < 0) or np.any(om > 1):
            raise DomainError("atoms must lie in [0, 1]")
        if np.any(ms <= 0) or abs(ms.sum() - 1.0) > 1e-9:
            raise DomainError("masses must be positive and sum to 1")
        object.__setattr__(self, "omega", om)
        object.__setattr__(self, "mass", ms)

    @property
    def mean(self) -> float:
        # centred compensated sum: mirrored atoms cancel exactly, so a symmetric measure gives 0.5
        return 0.5 + math.fsum(self.mass * (self.omega - 0.5))

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.omega.tolist(), self.mass.tolist()))


def _merge(omega, mass):
    order = np.argsort(omega, kind="stable")
    om, ms = omega[order], mass[order]
    new = np.concatenate([[True], np.diff(om) > _MERGE_TOL])
    starts = np.flatnonzero(new)
    return om[starts], np.add.reduceat(ms, starts)


def symmetrize(h: AngularMeasure) -> AngularMeasure:
    """Mirror every atom to ``1 - omega`` at half mass; the mean becomes 1/2."""
    # fold onto c in [1/2, 1]; 1 - c is then exact, so each mirrored pair sums to exactly 1
    c, ms = _merge(np.where(h.omega >= 0.5, h.omega, 1.0 - h.omega), h.mass)
    lo, hi = 1.0 - c, c
    centre = c == 0.5
    om = np.concatenate([lo[~centre], c[centre], hi[~centre]])
    ms = np.concatenate([0.5 * ms[~centre], ms[centre], 0.5 * ms[~centre]])
    order = np.argsort(om, kind="stable")
    return AngularMeasure(om[order], ms[order], h.r0, True)


def estimate_angular_measure(omega, r, r0: float, symmetrize_: bool = False) -> AngularMeasure:
    """Equal-mass atoms on the angles of points with ``r > r0``."""
    om = np.asarray(omega, dtype=float)
    rr = np.asarray(r, dtype=float)
    keep = rr > r0
    k = int(np.count_nonzero(keep))
    if k < MIN_RETAINED:
        raise InsufficientData(f"only {k} points with r > r0={r0}; need {MIN_RETAINED}", k)
    om_k = om[keep]
    h = AngularMeasure(*_merge(om_k, np.full(k, 1.0 / k)), r0=float(r0))
    return symmetrize(h) if symmetrize_ else h


def _broadcast_xy(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(~(x > 0)) or np.any(~(y > 0)):
        raise DomainError("Fréchet arguments must be positive")
    return np.broadcast_arrays(x, y)


def exponent_measure(x_tilde, y_tilde, h: AngularMeasure):
    """``2 * sum_j m_j max(w_j / x, (1 - w_j) / y)`` on the positive Fréchet scale.

    Evaluated exactly in O((atoms + points) log atoms) with prefix sums over
    the split angle ``x / (x + y)``.
    """
    x, y = _broadcast_xy(x_tilde, y_tilde)
    om, ms = h.omega, h.mass
    c_wm = np.concatenate([[0.0], np.cumsum(om * ms)])
    c_m = np.concatenate([[0.0], np.cumsum(ms)])
    tot_wm = c_wm[-1]
    with np.errstate(invalid="ignore"):
        split = np.where(np.isinf(x), 1.0, np.where(np.isinf(y), 0.0, x / (x + y)))
    # atoms with w >= split take w/x, the rest (1-w)/y
    j = np.searchsorted(om, split, side="left")
    lo_m, lo_wm = c_m[j], c_wm[j]
    hi_wm = tot_wm - lo_wm
    with np.errstate(invalid="ignore", divide="ignore"):
        part_x = np.where(hi_wm > 0, hi_wm / x, 0.0)
        part_y = np.where(lo_m - lo_wm > 0, (lo_m - lo_wm) / y, 0.0)
    out = 2.0 * (part_x + part_y)
    return float(out) if out.ndim == 0 else out


def g_poisson(x_tilde, y_tilde, h: AngularMeasure):
    """Joint CDF ``exp(-Lambda)``."""
    v = exponent_measure(x_tilde, y_tilde, h)
    return float(np.exp(-v)) if np.ndim(v) == 0 else np.exp(-v)


def _triangular_kde(grid, atoms, mass, bw):
    u = (grid[:, None] - atoms[None, :]) / bw
    k = np.clip(1.0 - np.abs(u), 0.0, None) / bw
    return k @ mass


def smoothed_angular_density(h: AngularMeasure, grid, bandwidth: float = KERNEL_BANDWIDTH):
    """Triangular-kernel density of ``h`` with reflection at 0 and 1 (plotting only)."""
    g = np.asarray(grid, dtype=float)
    om = np.concatenate([h.omega, -h.omega, 2.0 - h.omega])
    ms = np.concatenate([h.mass, h.mass, h.mass])
    return _triangular_kde(g, om, ms, bandwidth)


def intensity_density(r, omega, h: AngularMeasure | t.Callable[[np.ndarray], np.ndarray],
                      bandwidth: float = KERNEL_BANDWIDTH):
    """``2 / r^2`` times the angular density at ``omega``.

    ``h`` is either an :class:`AngularMeasure`, smoothed with a triangular
    kernel, or a callable density.
    """
    rr = np.asarray(r, dtype=float)
    if np.any(rr == 0):
        raise DomainError("intensity is singular at r = 0")
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    dens = h(w) if callable(h) else smoothed_angular_density(h, w, bandwidth)
    dens = np.asarray(dens, dtype=float).reshape(np.shape(omega)) if np.ndim(omega) else float(np.ravel(dens)[0])
    out = 2.0 / rr**2 * dens
    return float(out) if np.ndim(out) == 0 else out
