"""Validity checks for the bivariate tail models and RMSE scoring."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.stats import kstest

from .errors import DomainError, InsufficientData
from .logistic import LogisticModel, log_density
from .transforms import pickands_inverse

MIN_POINTS_R0 = 100
MIN_RETAINED = 30
DEFAULT_CRITICAL = 0.05
DEFAULT_MEAN_TOL = 0.05
H_GRID = 2001
_MAX_R_LEVELS = 400


@dataclass
class R0Selection:
    """Result of :func:`select_r0`; ``profile`` rows are (candidate, corr, retained)."""

    r0: float | None
    found: bool
    critical: float
    profile: np.ndarray
    corr: float = math.nan


def _corr(a, b):
    sa, sb = np.std(a), np.std(b)
    if sa == 0 or sb == 0:
        return math.nan
    return float(np.mean((a - a.mean()) * (b - b.mean())) / (sa * sb))


def select_r0(omega, r, critical: float = DEFAULT_CRITICAL,
              min_retained: int = MIN_RETAINED) -> R0Selection:
    """Most negative radial cut-off with ``|corr(r, omega | r > r0)| < critical``.

    Candidates are the empirical radial quantiles at 1% steps. A candidate
    whose retained set is smaller than ``min_retained`` or has zero variance
    is skipped.
    """
    om = np.asarray(omega, dtype=float)
    rr = np.asarray(r, dtype=float)
    if om.shape != rr.shape or om.size < MIN_POINTS_R0:
        raise InsufficientData(f"need at least {MIN_POINTS_R0} points, got {om.size}", om.size)
    if not 0.0 < critical < 1.0:
        raise DomainError("critical must lie in (0, 1)")
    cands = np.quantile(rr, np.arange(1, 100) / 100.0)
    rows = []
    for c in cands:
        keep = rr > c
        k = int(np.count_nonzero(keep))
        rho = _corr(rr[keep], om[keep]) if k >= min_retained else math.nan
        rows.append((float(c), rho, k))
    profile = np.array(rows, dtype=float)
    with np.errstate(invalid="ignore"):
        ok = np.abs(profile[:, 1]) < critical
    hits = np.flatnonzero(ok)
    if hits.size == 0:
        return R0Selection(None, False, critical, profile)
    i = hits[0]
    return R0Selection(float(profile[i, 0]), True, critical, profile, float(profile[i, 1]))


@dataclass(frozen=True)
class UniformityResult:
    deviation: float
    passed: bool
    tolerance: float
    k: int


def radial_uniformity(r, r0: float, tol: float | None = None) -> UniformityResult:
    """KS distance between ``r / r0`` (for ``r > r0``) and the uniform law on [0, 1].

    Uniformity of ``r`` on ``(r0, 0)`` is the same as ``Pr(r >= R | r > r0) = R / r0``.
    The default tolerance is the 5% KS bound ``1.36 / sqrt(k)``.
    """
    if not r0 < 0:
        raise DomainError("r0 must be negative")
    rr = np.asarray(r, dtype=float)
    v = rr[rr > r0] / r0
    k = int(v.size)
    if k == 0:
        raise InsufficientData("no points retained above r0", 0)
    d = float(kstest(v, "uniform").statistic)
    bound = 1.36 / math.sqrt(k) if tol is None else float(tol)
    return UniformityResult(d, d < bound, bound, k)


def pickands_density_logistic(omega, r, m: LogisticModel | float, n: int):
    """``|r|`` times the logistic bivariate density at the inverse-Pickands point."""
    alpha = m.alpha if isinstance(m, LogisticModel) else float(m)
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0) or np.any(w >= 1):
        raise DomainError("omega must lie strictly inside (0, 1)")
    x, y = pickands_inverse(w, r, n)
    out = np.abs(np.asarray(r, dtype=float)) * np.exp(log_density(x, y, alpha))
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class HlDensity:
    grid: np.ndarray
    density: np.ndarray
    mean: float
    mu: float
    cv: float


def h_l_density(r, m: LogisticModel | float, n: int, r0: float = -math.inf,
                n_grid: int = H_GRID) -> HlDensity:
    """Normalised logistic Pickands density on an angular grid.

    The density is averaged over the observed radii ``r > r0`` (at most
    400 radial quantiles are used), normalised by its Simpson integral, and
    summarised by its mean. ``cv`` is the mean coefficient of variation
    across radii of the per-radius normalised shapes; 0 means no radial
    dependence.
    """
    rr = np.asarray(r, dtype=float)
    rr = rr[rr > r0]
    if rr.size == 0:
        raise InsufficientData("no points retained above r0", 0)
    if rr.size > _MAX_R_LEVELS:
        rr = np.quantile(rr, (np.arange(_MAX_R_LEVELS) + 0.5) / _MAX_R_LEVELS)
    g = np.linspace(0.0, 1.0, n_grid)
    inner = g[1:-1]
    phi = np.zeros((rr.size, n_grid))
    phi[:, 1:-1] = pickands_density_logistic(inner[None, :], rr[:, None], m, n)
    mean_phi = phi.mean(axis=0)
    mu = float(simpson(mean_phi, x=g))
    if not mu > 0:
        raise DomainError("Pickands density integrates to a non-positive value")
    dens = mean_phi / mu
    mean = float(simpson(g * dens, x=g))
    per_r = simpson(phi, x=g, axis=1)
    shapes = phi[per_r > 0] / per_r[per_r > 0, None]
    with np.errstate(invalid="ignore", divide="ignore"):
        cv_g = shapes.std(axis=0) / shapes.mean(axis=0)
    cv = float(np.nanmean(cv_g[1:-1])) if shapes.shape[0] > 1 else 0.0
    return HlDensity(g, dens, mean, mu, cv)


@dataclass(frozen=True)
class MeanCheck:
    mean: float
    passed: bool
    margin: float


def mean_constraint_check(mean: float, tol: float = DEFAULT_MEAN_TOL) -> MeanCheck:
    """Pass iff ``|mean - 0.5| <= tol``; ``margin`` is the slack left."""
    if not 0.0 <= mean <= 1.0:
        raise DomainError("mean must lie in [0, 1]")
    dev = abs(mean - 0.5)
    return MeanCheck(float(mean), dev <= tol, float(tol - dev))


def rmse_joint_cdf(model, empirical) -> float:
    a = np.asarray(model, dtype=float)
    b = np.asarray(empirical, dtype=float)
    if a.shape != b.shape:
        raise DomainError(f"grid mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise DomainError("empty grid")
    return float(np.sqrt(np.mean((a - b) ** 2)))
