"""Maximum-likelihood GPD fitting and probability-plot diagnostics."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .core import GpdParams, gpd_cdf, gpd_log_likelihood, gpd_quantile, _log1p_ratio
from .errors import DomainError, FitError, InsufficientData

logger = logging.getLogger(__name__)

MIN_EXCESSES = 30
MAX_ITER = 500
STEP_TOL = 1e-10
GRAD_TOL = 1e-8
#: Probability-plot fit is flagged good when no point strays further than this from y = x.
PP_MAX_DEVIATION = 0.05

# series coefficients of B(x) = (log1p(x) - x/(1+x)) / x**2 and of B'(x)
_B_COEF = np.array([(-1) ** j * (j + 1) / (j + 2) for j in range(10)])
_DB_COEF = np.array([j * (-1) ** j * (j + 1) / (j + 2) for j in range(1, 10)])


@dataclass(frozen=True)
class GpdFit:
    """Result of :func:`fit_gpd_mle`."""

    xi: float
    sigma_tilde: float
    se_xi: float
    se_sigma: float
    cov: np.ndarray
    loglik: float
    n: int
    converged: bool
    n_iter: int
    method: str

    def params(self, u: float = 0.0, zeta: float = 1.0) -> GpdParams:
        return GpdParams(self.xi, self.sigma_tilde, u, zeta)


def _b_terms(x: np.ndarray):
    small = np.abs(x) < 1e-2
    b = np.empty_like(x)
    db = np.empty_like(x)
    xs = x[small]
    b[small] = np.polynomial.polynomial.polyval(xs, _B_COEF)
    db[small] = np.polynomial.polynomial.polyval(xs, _DB_COEF)
    xl = x[~small]
    a = np.log1p(xl) - xl / (1.0 + xl)
    b[~small] = a / xl**2
    db[~small] = 1.0 / (xl * (1.0 + xl) ** 2) - 2.0 * a / xl**3
    return b, db


def _derivs(l: np.ndarray, xi: float, s: float):
    """Log-likelihood, gradient and Hessian in (xi, s = log sigma)."""
    tt = l * math.exp(-s)
    x = xi * tt
    if np.any(x <= -1.0):
        return -math.inf, None, None
    z = 1.0 + x
    ll = -l.size * s - float(np.sum(np.log1p(x) + tt * _log1p_ratio(x)))
    b, db = _b_terms(x)
    t_over_z = tt / z
    g_xi = float(np.sum(tt * tt * b - t_over_z))
    g_s = float(np.sum(-1.0 + (xi + 1.0) * t_over_z))
    h_ss = float(-(xi + 1.0) * np.sum(tt / z**2))
    h_sx = float(np.sum(tt * (1.0 - tt) / z**2))
    h_xx = float(np.sum(tt**3 * db + tt * tt / z**2))
    return ll, np.array([g_xi, g_s]), np.array([[h_xx, h_sx], [h_sx, h_ss]])


def _feasible(l_max: float, xi: float, s: float) -> bool:
    return xi > -1.0 and 1.0 + xi * l_max * math.exp(-s) > 0


def _moment_start(l: np.ndarray):
    m = float(np.mean(l))
    v = float(np.var(l))
    ratio = m * m / v
    xi0 = min(max(0.5 * (1.0 - ratio), -0.9), 0.9)
    sig0 = 0.5 * m * (1.0 + ratio)
    l_max = float(np.max(l))
    if xi0 < 0 and 1.0 + xi0 * l_max / sig0 <= 0:
        sig0 = -xi0 * l_max * 1.05
    return xi0, math.log(sig0)


def _newton(l: np.ndarray, xi: float, s: float):
    """Damped Newton ascent with backtracking; returns (xi, s, ll, g, H, iters, ok)."""
    l_max = float(np.max(l))
    n = l.size
    ll, g, h = _derivs(l, xi, s)
    if not np.isfinite(ll):
        raise FitError("infeasible starting point")
    for it in range(1, MAX_ITER + 1):
        try:
            step = -np.linalg.solve(h, g)
            eig_ok = np.all(np.linalg.eigvalsh(h) < 0)
        except np.linalg.LinAlgError:
            eig_ok = False
        if not eig_ok or float(step @ g) <= 0:
            # indefinite curvature: scaled gradient step
            step = g / (n * (1.0 + np.abs(np.diag(h)) / n).max())
        lam = 1.0
        while lam > 1e-12:
            xi_new, s_new = xi + lam * step[0], s + lam * step[1]
            if _feasible(l_max, xi_new, s_new):
                ll_new, g_new, h_new = _derivs(l, xi_new, s_new)
                if ll_new >= ll - 1e-12 * abs(ll):
                    break
            lam *= 0.5
        else:
            return xi, s, ll, g, h, it, False
        rel = max(abs(lam * step[0]) / max(1.0, abs(xi)), abs(lam * step[1]) / max(1.0, abs(s)))
        xi, s, ll, g, h = xi_new, s_new, ll_new, g_new, h_new
        if rel < STEP_TOL and np.linalg.norm(g) / n < GRAD_TOL:
            return xi, s, ll, g, h, it, True
        if np.linalg.norm(g) / n < GRAD_TOL * 1e-3:
            return xi, s, ll, g, h, it, True
    return xi, s, ll, g, h, MAX_ITER, False


def _simplex(l: np.ndarray, xi: float, s: float):
    l_max = float(np.max(l))

    def nll(th):
        if not _feasible(l_max, th[0], th[1]):
            return math.inf
        return -_derivs(l, th[0], th[1])[0]

    best = None
    for dxi in (0.0, -0.3, 0.3):
        start = np.array([xi + dxi, s])
        if not _feasible(l_max, *start):
            start[1] = math.log(max(-start[0], 1e-3) * l_max * 1.1)
        res = minimize(nll, start, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-12, "maxiter": 4000})
        if best is None or res.fun < best.fun:
            best = res
    return float(best.x[0]), float(best.x[1])


def fit_gpd_mle(excesses, start: tuple[float, float] | None = None) -> GpdFit:
    """Fit (xi, sigma_tilde) by maximum likelihood.

    Parameters
    ----------
    excesses : array_like
        Nonnegative exceedance depths; at least 30.
    start : tuple, optional
        Starting (xi, sigma_tilde); defaults to a moment estimate. Used for
        warm starts along a threshold grid.

    Raises
    ------
    InsufficientData
        Fewer than 30 excesses.
    FitError
        Degenerate sample or no convergence; ``err.best`` holds the best iterate.
    """
    l = np.asarray(excesses, dtype=float)
    if l.size < MIN_EXCESSES:
        raise InsufficientData(f"need at least {MIN_EXCESSES} excesses, got {l.size}", l.size)
    if np.any(l < 0) or not np.all(np.isfinite(l)):
        raise DomainError("excesses must be finite and nonnegative")
    if np.ptp(l) <= 1e-12 * max(1.0, float(np.max(l))):
        raise FitError("degenerate likelihood: all excesses equal")

    l_max = float(np.max(l))
    seeds = []
    if start is not None and start[1] > 0 and _feasible(l_max, start[0], math.log(start[1])):
        seeds.append((start[0], math.log(start[1])))
    seeds.append(_moment_start(l))

    method = "newton"
    result = None
    for xi0, s0 in seeds:
        xi, s, ll, g, h, it, ok = _newton(l, xi0, s0)
        if ok and np.all(np.linalg.eigvalsh(h) < 0):
            result = (xi, s, ll, h, it)
            break
    if result is None:
        method = "simplex"
        xi, s = _simplex(l, *seeds[-1])
        xi, s, ll, g, h, it, ok = _newton(l, xi, s)
        if not ok:
            raise FitError("GPD likelihood maximisation did not converge",
                           best=(xi, math.exp(s), ll))
        result = (xi, s, ll, h, it)

    xi, s, ll, h, it = result
    sigma = math.exp(s)
    cov_s = np.linalg.inv(-h)
    jac = np.diag([1.0, sigma])
    cov = jac @ cov_s @ jac
    return GpdFit(xi=float(xi), sigma_tilde=sigma, se_xi=math.sqrt(cov[0, 0]),
                  se_sigma=math.sqrt(cov[1, 1]), cov=cov, loglik=float(ll), n=int(l.size),
                  converged=True, n_iter=int(it), method=method)


def log_likelihood_gradient(excesses, xi: float, sigma_tilde: float) -> np.ndarray:
    """Analytic gradient of the log-likelihood in (xi, sigma_tilde)."""
    l = np.asarray(excesses, dtype=float)
    _, g, _ = _derivs(l, xi, math.log(sigma_tilde))
    if g is None:
        raise DomainError("parameters outside the support")
    return np.array([g[0], g[1] / sigma_tilde])


def _positions(n: int) -> np.ndarray:
    return np.arange(1, n + 1) / (n + 1.0)


def pp_points(excesses, p: GpdParams) -> np.ndarray:
    """(empirical, model) probability pairs with plotting positions i/(n+1)."""
    l = np.sort(np.asarray(excesses, dtype=float))
    return np.column_stack([_positions(l.size), gpd_cdf(l, p)])


def qq_points(excesses, p: GpdParams) -> np.ndarray:
    """(model quantile, empirical quantile) pairs."""
    l = np.sort(np.asarray(excesses, dtype=float))
    return np.column_stack([gpd_quantile(_positions(l.size), p), l])


def diagonal_deviation(points) -> tuple[float, float]:
    """Max absolute and RMS vertical distance of points from y = x."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise DomainError("no points")
    d = pts[:, 1] - pts[:, 0]
    return float(np.max(np.abs(d))), float(np.sqrt(np.mean(d * d)))


__all__ = [
    "GpdFit", "fit_gpd_mle", "log_likelihood_gradient", "pp_points", "qq_points",
    "diagonal_deviation", "gpd_log_likelihood", "PP_MAX_DEVIATION",
]
