"""Threshold choice from mean-residual-life and parameter-stability curves."""

from __future__ import annotations

import logging
import math
import typing as t
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2

from .errors import DomainError, FitError, InsufficientData
from .ugpd import fit_gpd_mle

logger = logging.getLogger(__name__)

EXCEEDANCE_FLOOR = 30
DEFAULT_R2_MIN = 0.95


@dataclass(frozen=True)
class StabilityPoint:
    """Per-threshold fit.

    ``sigma_star`` is the modified scale taken on the negated (upper-tail)
    axis, ``sigma_tilde - xi * (-u)``, which is constant in ``u`` wherever the
    GPD holds.
    """

    u: float
    xi_hat: float
    sigma_star: float
    n_exc: int
    se_xi: float = math.nan
    se_sigma_star: float = math.nan
    ok: bool = True
    message: str = ""


@dataclass
class ThresholdSelection:
    u_opt: float | None
    found: bool
    r2_min: float
    grid: np.ndarray
    mrl: dict[int, np.ndarray] = field(default_factory=dict)
    stability: dict[int, list[StabilityPoint]] = field(default_factory=dict)
    r2: dict[int, np.ndarray] = field(default_factory=dict)
    message: str = ""
    index: int | None = None
    snapped: bool = False


def default_grid(minima, n: int = 100, q_lo: float = 0.001, q_hi: float = 0.25) -> np.ndarray:
    """Evenly spaced thresholds between two empirical quantiles, descending."""
    x = np.asarray(minima, dtype=float)
    lo, hi = np.quantile(x, [q_lo, q_hi])
    return np.linspace(hi, lo, n)


def mrl_curve(minima, thresholds, floor: int = EXCEEDANCE_FLOOR) -> np.ndarray:
    """Rows of (u, mean of u - X over X < u, count); sparse thresholds omitted."""
    x = np.sort(np.asarray(minima, dtype=float))
    grid = np.asarray(thresholds, dtype=float)
    if grid.size == 0:
        raise DomainError("empty threshold grid")
    csum = np.concatenate([[0.0], np.cumsum(x)])
    k = np.searchsorted(x, grid, side="left")
    keep = k >= max(floor, 1)
    k, g = k[keep], grid[keep]
    mean_excess = g - csum[k] / np.maximum(k, 1)
    return np.column_stack([g, mean_excess, k.astype(float)])


def r_squared(points) -> float:
    """Coefficient of determination of the least-squares line through ``points``.

    A constant ``y`` counts as a perfect (flat) line and returns 1.0.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.shape[0] < 3:
        raise DomainError("need at least 3 points")
    x, y = pts[:, 0], pts[:, 1]
    if np.ptp(x) == 0:
        raise DomainError("all x equal")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot <= 1e-30 * max(1.0, float(np.sum(y * y))):
        return 1.0
    slope, icpt = np.polyfit(x, y, 1)
    ss_res = float(np.sum((y - (slope * x + icpt)) ** 2))
    return float(max(0.0, 1.0 - ss_res / ss_tot))


def linearity(x, y, se=None, level: float = 0.99) -> float:
    """R² with a sampling-noise aware reading of "constant".

    When standard errors are given and the weighted spread of ``y`` about its
    weighted mean is within the ``level`` chi-square bound, the curve is
    statistically flat and scores 1.0 (a flat line is linear); otherwise the
    plain :func:`r_squared` is returned.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if se is not None:
        se = np.asarray(se, dtype=float)
        if np.all(np.isfinite(se)) and np.all(se > 0) and y.size >= 2:
            w = 1.0 / se**2
            ybar = float(np.sum(w * y) / np.sum(w))
            q = float(np.sum(w * (y - ybar) ** 2))
            if q <= chi2.ppf(level, y.size - 1):
                return 1.0
    return r_squared(np.column_stack([x, y]))


def stability_curve(minima, thresholds, floor: int = EXCEEDANCE_FLOOR) -> list[StabilityPoint]:
    """Fit a GPD at every threshold; failed or sparse thresholds are flagged.

    Fits run from the shallowest threshold downward, each warm-started from
    its neighbour; the output keeps the input order.
    """
    x = np.sort(np.asarray(minima, dtype=float))
    grid = np.asarray(thresholds, dtype=float)
    order = np.argsort(-grid, kind="stable")
    out: list[StabilityPoint | None] = [None] * grid.size
    warm = None
    for i in order:
        u = float(grid[i])
        k = int(np.searchsorted(x, u, side="left"))
        if k < floor:
            out[i] = StabilityPoint(u, math.nan, math.nan, k, ok=False,
                                    message=f"{k} exceedances < floor {floor}")
            continue
        try:
            fit = fit_gpd_mle(u - x[:k], start=warm)
        except (FitError, InsufficientData) as err:
            out[i] = StabilityPoint(u, math.nan, math.nan, k, ok=False, message=str(err))
            continue
        warm = (fit.xi, fit.sigma_tilde)
        s_star = fit.sigma_tilde + fit.xi * u
        var = fit.cov[1, 1] + u * u * fit.cov[0, 0] + 2.0 * u * fit.cov[0, 1]
        out[i] = StabilityPoint(u, fit.xi, s_star, k, fit.se_xi, math.sqrt(max(var, 0.0)))
    return t.cast(list, out)


def _candidate_r2(grid, mrl, stab, r2_min):
    """R² of (xi, sigma*) restricted to thresholds <= each candidate."""
    us = np.array([p.u for p in stab if p.ok])
    xi = np.array([p.xi_hat for p in stab if p.ok])
    ss = np.array([p.sigma_star for p in stab if p.ok])
    se_xi = np.array([p.se_xi for p in stab if p.ok])
    se_ss = np.array([p.se_sigma_star for p in stab if p.ok])
    rows = []
    for u in grid:
        sel = us <= u
        if sel.sum() < 3 or np.ptp(us[sel]) == 0:
            rows.append((u, math.nan, math.nan, math.nan))
            continue
        r_xi = linearity(us[sel], xi[sel], se_xi[sel])
        r_ss = linearity(us[sel], ss[sel], se_ss[sel])
        msel = mrl[:, 0] <= u
        r_mrl = r_squared(mrl[msel, :2]) if msel.sum() >= 3 else math.nan
        rows.append((u, r_xi, r_ss, r_mrl))
    return np.array(rows, dtype=float).reshape(-1, 4)


def select_threshold(minima, grid=None, r2_min: float = DEFAULT_R2_MIN,
                     floor: int = EXCEEDANCE_FLOOR) -> ThresholdSelection:
    """Highest threshold below which the stability curves are linear.

    When the grid points below that threshold keep exactly the same
    exceedances (an empty band wider than one grid step), ``u_opt`` moves down
    to just above the largest exceedance and ``snapped`` is set; ``index``
    always names the grid point that passed.

    Parameters
    ----------
    minima : array_like or mapping of int to array_like
        Cluster minima in dBm. A mapping keyed by the declustering gap ``mg``
        requires the criterion to hold for every entry.
    grid : array_like, optional
        Candidate thresholds; defaults to :func:`default_grid` of the first
        entry. Scanned from the highest value down.
    r2_min : float
        Minimum R² for the shape and modified-scale curves.

    Returns
    -------
    ThresholdSelection
        ``found`` is False when no candidate qualifies; the curves are kept for
        inspection either way.
    """
    sets = dict(minima) if isinstance(minima, t.Mapping) else {0: minima}
    sets = {k: np.asarray(v, dtype=float) for k, v in sets.items()}
    if grid is None:
        grid = default_grid(next(iter(sets.values())))
    grid = np.sort(np.asarray(grid, dtype=float))[::-1]
    sel = ThresholdSelection(None, False, r2_min, grid)
    passing = np.ones(grid.size, dtype=bool)
    for mg, x in sets.items():
        mrl = mrl_curve(x, grid, floor)
        stab = stability_curve(x, grid, floor)
        r2 = _candidate_r2(grid, mrl, stab, r2_min)
        sel.mrl[mg], sel.stability[mg], sel.r2[mg] = mrl, stab, r2
        with np.errstate(invalid="ignore"):
            passing &= (r2[:, 1] >= r2_min) & (r2[:, 2] >= r2_min)
    hits = np.flatnonzero(passing)
    if hits.size:
        i = int(hits[0])
        sel.index = i
        sel.u_opt = float(grid[i])
        sel.found = True
        # thresholds with the same exceedance set carry the same information;
        # across an empty band wider than a grid step, move u down to the data
        counts = [np.searchsorted(np.sort(x), grid, side="left") for x in sets.values()]
        j = i
        while j + 1 < grid.size and all(c[j + 1] == c[j] for c in counts):
            j += 1
        if j > i:
            top = max(float(np.max(x[x < grid[j]])) for x in sets.values())
            sel.u_opt = float(np.nextafter(top, np.inf))
            sel.snapped = True
    else:
        sel.message = "no threshold satisfies the linearity criterion"
        logger.info(sel.message)
    return sel
