"""Ground-truth generators and brute-force oracles for desk-scale checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import truncnorm

from .core import GpdParams, PowerSeries, gpd_quantile
from .errors import DomainError


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _log_stable_scaled(alpha: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """``alpha * log S`` for a positive stable ``S`` with ``E exp(-tS) = exp(-t^alpha)``.

    Kanter's representation, taken in logs so that tiny ``alpha`` stays finite.
    """
    u = rng.uniform(0.0, math.pi, size)
    w = rng.exponential(1.0, size)
    lsa = np.log(np.sin(alpha * u))
    return (lsa - np.log(np.sin(u))
            + (1.0 - alpha) * (np.log(np.sin((1.0 - alpha) * u)) - lsa - np.log(w)))


def gen_bivariate_logistic_frechet(alpha: float, n: int, seed=None):
    """Exact draws from the logistic bivariate extreme-value law, unit-Fréchet margins.

    Uses the positive-stable mixture: ``Z_i = (S / E_i)^alpha`` with
    ``E_i ~ Exp(1)``. Returns two arrays of length ``n``.
    """
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    rng = _rng(seed)
    if alpha == 1.0:
        e = rng.exponential(1.0, (2, n))
        return 1.0 / e[0], 1.0 / e[1]
    a_log_s = _log_stable_scaled(alpha, n, rng)
    e = rng.exponential(1.0, (2, n))
    return np.exp(a_log_s - alpha * np.log(e[0])), np.exp(a_log_s - alpha * np.log(e[1]))


def logistic_angular_density(w, alpha: float):
    """Density of the logistic angular measure on (0, 1); total mass 1, mean 1/2."""
    w = np.asarray(w, dtype=float)
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lw, l1 = np.log(w), np.log1p(-w)
        ls = np.logaddexp(-lw / alpha, -l1 / alpha)
        logh = (math.log(0.5 * (1.0 / alpha - 1.0)) + (-1.0 - 1.0 / alpha) * (lw + l1)
                + (alpha - 2.0) * ls)
        out = np.where((w > 0) & (w < 1), np.exp(logh), 0.0)
    return out[()] if out.ndim == 0 else out


def logistic_angular_cdf(w, alpha: float):
    """Closed-form ``H([0, w])`` of the logistic angular measure.

    Obtained from the partial moments ``int_w^1 v h`` and ``int_0^w (1-v) h``,
    which are the scaled first partials of V at ``(w, 1 - w)``.
    """
    w = np.asarray(w, dtype=float)
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    inner = (w > 0) & (w < 1)
    ws = np.where(inner, w, 0.5)
    lw, l1 = np.log(ws), np.log1p(-ws)
    ls = np.logaddexp(-lw / alpha, -l1 / alpha)
    k = 1.0 - 1.0 / alpha
    m1 = 0.5 * np.exp((alpha - 1.0) * ls + k * lw)
    m0 = 0.5 * np.exp((alpha - 1.0) * ls + k * l1)
    out = np.where(inner, 0.5 - m1 + m0, np.where(w >= 1, 1.0, 0.0))
    return out[()] if out.ndim == 0 else out


def logistic_angular_atoms(alpha: float, n_grid: int = 2001):
    """Discretise the logistic angular measure onto ``n_grid`` equispaced nodes.

    Each node carries the exact mass of its surrounding cell.
    """
    if n_grid < 3:
        raise DomainError("need at least 3 grid points")
    w = np.linspace(0.0, 1.0, n_grid)
    edges = np.concatenate([[0.0], 0.5 * (w[1:] + w[:-1]), [1.0]])
    mass = np.diff(logistic_angular_cdf(edges, alpha))
    return w, mass / mass.sum()


def sample_logistic_angles(alpha: float, n: int, seed=None) -> np.ndarray:
    """Draws from the logistic angular measure by interpolated inverse CDF."""
    rng = _rng(seed)
    # logit-spaced nodes resolve the steep ends of the CDF
    z = np.linspace(-40.0, 40.0, 200001)
    w = 1.0 / (1.0 + np.exp(-z))
    cdf = logistic_angular_cdf(w, alpha)
    cdf, idx = np.unique(cdf, return_index=True)
    return np.interp(rng.random(n), cdf, w[idx])


def gen_pickands_points(alpha: float, n_tail: int, r0: float, n_bulk: int = 0, seed=None):
    """Points in pseudo-polar coordinates with a known radial cut-off.

    Above ``r0`` the radius is uniform on ``(r0, 0)`` and independent of an
    angle drawn from the logistic angular measure. Below ``r0`` a bulk with
    strongly radius-dependent angles is added so that cut-off selection has
    something to reject. Returns ``(omega, r)``.
    """
    if not r0 < 0:
        raise DomainError("r0 must be negative")
    rng = _rng(seed)
    om_t = sample_logistic_angles(alpha, n_tail, rng)
    r_t = rng.uniform(r0, 0.0, n_tail)
    r_b = r0 - rng.exponential(abs(r0), n_bulk)
    # bulk angles hug 0 and rise with depth: any bulk inside the cut shows as correlation
    om_b = 0.02 + 0.2 * (1.0 - np.exp((r_b - r0) / abs(r0))) * rng.random(n_bulk)
    return np.concatenate([om_t, om_b]), np.concatenate([r_t, r_b])


@dataclass
class TraceTruth:
    gpd_x: GpdParams
    gpd_y: GpdParams
    alpha: float
    window: int
    tail_windows: np.ndarray
    x_tilde: np.ndarray
    y_tilde: np.ndarray
    extra: dict = field(default_factory=dict)


def gen_tail_power_traces(gpd_x: GpdParams, gpd_y: GpdParams, alpha: float, n_total: int,
                          tail_fraction: float, seed=None, window: int = 10,
                          bulk_offset: float = 15.0, bulk_sd: float = 3.0,
                          resolution: float = 1.0):
    """Paired receiver traces with logistic-dependent joint fades.

    The series are cut into windows of ``window`` samples. A ``tail_fraction``
    share of windows carries one joint fade at the window centre, with depths
    below ``gpd.u`` following the given GPDs and dependence following the
    logistic law. Every other sample is Gaussian in dBm, truncated to lie at
    or above the threshold.

    Returns ``(series_x, series_y, truth)``.
    """
    if not 0.0 <= tail_fraction < 0.25:
        raise DomainError("tail_fraction must lie in [0, 0.25)")
    if window < 5:
        raise DomainError("window must be >= 5 so fades stay separated")
    rng = _rng(seed)
    n_win = n_total // window
    n_total = n_win * window
    k = int(round(tail_fraction * n_win))
    tail_win = np.sort(rng.choice(n_win, size=k, replace=False)) if k else np.empty(0, np.int64)

    def bulk(u):
        mean = u + bulk_offset
        a = (u - mean) / bulk_sd
        return truncnorm.rvs(a, np.inf, loc=mean, scale=bulk_sd, size=n_total, random_state=rng)

    px, py = bulk(gpd_x.u), bulk(gpd_y.u)
    if k:
        zx, zy = gen_bivariate_logistic_frechet(alpha, k, rng)
        # Fréchet -> uniform -> GPD depth; exp(-1/z) < 1 for finite z
        lx = gpd_quantile(np.minimum(np.exp(-1.0 / zx), np.nextafter(1.0, 0.0)), gpd_x)
        ly = gpd_quantile(np.minimum(np.exp(-1.0 / zy), np.nextafter(1.0, 0.0)), gpd_y)
        pos = tail_win * window + window // 2
        # keep u - l strictly below u in floating point
        px[pos] = gpd_x.u - np.maximum(lx, 1e-9)
        py[pos] = gpd_y.u - np.maximum(ly, 1e-9)
    else:
        zx = zy = np.empty(0)
    sx = PowerSeries.from_values(px, resolution)
    sy = PowerSeries.from_values(py, resolution)
    return sx, sy, TraceTruth(gpd_x, gpd_y, alpha, window, tail_win, zx, zy)


def brute_force_joint_cdf(x, y, grid_x, grid_y) -> np.ndarray:
    """Share of pairs with ``X <= gx`` and ``Y <= gy`` at every grid node.

    Output shape is ``(len(grid_x), len(grid_y))``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size == 0 or x.shape != y.shape:
        raise DomainError("need a nonempty set of pairs")
    gx = np.asarray(grid_x, dtype=float)
    gy = np.asarray(grid_y, dtype=float)
    below_y = y[None, :] <= gy[:, None]
    out = np.empty((gx.size, gy.size))
    for i, g in enumerate(gx):
        out[i] = below_y[:, x <= g].sum(axis=1)
    return out / x.size
