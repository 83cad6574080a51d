"""Symmetric logistic bivariate extreme-value model on unit-Fréchet margins."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .alignment import pearson_correlation
from .errors import DomainError, InsufficientData

ALPHA_LO = 1e-4
ALPHA_HI = 1.0 - 1e-4
MIN_PAIRS = 30
# one-sided chi-square(1) 90% point: boundary is not rejected below this LR
_LR_BOUNDARY = 2.71


class FitMethod(enum.Enum):
    FROM_RHO = "FromRho"
    MLE = "MLE"


@dataclass(frozen=True)
class LogisticModel:
    alpha: float
    fit_method: FitMethod = FitMethod.MLE
    loglik: float = math.nan
    boundary: bool = False
    converged: bool = True
    likelihood: str = "full"

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}")


def alpha_from_rho(rho: float) -> LogisticModel:
    """Moment estimate ``alpha = sqrt(1 - rho)``.

    ``rho`` must be the correlation on the Gumbel (log-Fréchet) scale for the
    identity to hold exactly. ``rho = 0`` returns the independence boundary.
    """
    if not math.isfinite(rho):
        raise DomainError("rho must be finite")
    if rho >= 1.0:
        raise DomainError("rho >= 1 means complete dependence; alpha would be 0")
    if rho < 0.0:
        raise DomainError(
            f"rho={rho} < 0: the logistic family cannot represent negative association; "
            "use the point-process model or check the tail alignment"
        )
    a = math.sqrt(1.0 - rho)
    return LogisticModel(a, FitMethod.FROM_RHO, boundary=(rho == 0.0))


def log_frechet_correlation(x_tilde, y_tilde) -> float:
    """Pearson correlation of ``log x`` and ``log y`` (Gumbel scale)."""
    return pearson_correlation(np.log(np.asarray(x_tilde, dtype=float)),
                               np.log(np.asarray(y_tilde, dtype=float)))


def _check(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(~(x > 0)) or np.any(~(y > 0)):
        raise DomainError("Fréchet arguments must be positive")
    return x, y


def _check_alpha(alpha, allow_one=True):
    hi_ok = alpha <= 1.0 if allow_one else alpha < 1.0
    if not (alpha > 0.0 and hi_ok):
        raise DomainError(f"alpha outside (0, 1]: {alpha}")


def _scalar(v):
    return float(v) if np.ndim(v) == 0 else v


def _log_s(x, y, alpha):
    """log(x^(-1/alpha) + y^(-1/alpha)) without overflow for small alpha."""
    return np.logaddexp(-np.log(x) / alpha, -np.log(y) / alpha)


def v_logistic(x_tilde, y_tilde, alpha: float):
    """Exponent measure ``(x^(-1/alpha) + y^(-1/alpha))^alpha``."""
    x, y = _check(x_tilde, y_tilde)
    _check_alpha(alpha)
    return _scalar(np.exp(alpha * _log_s(x, y, alpha)))


def g_logistic(x_tilde, y_tilde, m: LogisticModel | float):
    """Joint CDF ``exp(-V)``; infinite arguments act as marginalisation."""
    alpha = m.alpha if isinstance(m, LogisticModel) else float(m)
    x, y = _check(x_tilde, y_tilde)
    _check_alpha(alpha)
    with np.errstate(divide="ignore", over="ignore"):
        v = np.exp(alpha * _log_s(x, y, alpha))
    return _scalar(np.exp(-v))


def logistic_mixed_partial(x_tilde, y_tilde, alpha: float):
    """Closed-form second cross derivative of V (negative for alpha < 1)::

        (1 - 1/alpha) S^(alpha-2) (x y)^(-1/alpha - 1),  S = x^(-1/alpha) + y^(-1/alpha)
    """
    x, y = _check(x_tilde, y_tilde)
    _check_alpha(alpha)
    if alpha == 1.0:
        return _scalar(np.zeros(np.broadcast(x, y).shape))
    lx, ly = np.log(x), np.log(y)
    ls = _log_s(x, y, alpha)
    logmag = (alpha - 2.0) * ls - (1.0 / alpha + 1.0) * (lx + ly)
    return _scalar(-(1.0 / alpha - 1.0) * np.exp(logmag))


def _log_terms(x, y, alpha):
    lx, ly = np.log(x), np.log(y)
    a, b = -lx / alpha, -ly / alpha
    ls = np.logaddexp(a, b)
    return a + b - lx - ly, ls


def log_density(x_tilde, y_tilde, alpha: float):
    """Log of the bivariate density ``G (V_x V_y - V_xy)``."""
    x, y = _check(x_tilde, y_tilde)
    _check_alpha(alpha)
    base, ls = _log_terms(x, y, alpha)
    tail = alpha * ls if alpha == 1.0 else np.logaddexp(alpha * ls, math.log(1.0 / alpha - 1.0))
    return _scalar(-np.exp(alpha * ls) + base + (alpha - 2.0) * ls + tail)


def log_neg_mixed_partial(x_tilde, y_tilde, alpha: float):
    """``log(-V_xy)``, the per-pair term of the mixed-partial likelihood."""
    x, y = _check(x_tilde, y_tilde)
    _check_alpha(alpha, allow_one=False)
    base, ls = _log_terms(x, y, alpha)
    return _scalar(math.log(1.0 / alpha - 1.0) + (alpha - 2.0) * ls + base)


def loglik_full(x_tilde, y_tilde, alpha: float) -> float:
    return float(np.sum(log_density(x_tilde, y_tilde, alpha)))


def loglik_mixed_partial(x_tilde, y_tilde, alpha: float) -> float:
    return float(np.sum(log_neg_mixed_partial(x_tilde, y_tilde, alpha)))


def fit_alpha_mle(x_tilde, y_tilde, likelihood: str = "full", xatol: float = 1e-6) -> LogisticModel:
    """Bounded scalar maximum likelihood for alpha.

    Parameters
    ----------
    x_tilde, y_tilde : array_like
        Unit-Fréchet pairs, at least 30.
    likelihood : {"full", "mixed_partial"}
        ``full`` uses the proper bivariate density. ``mixed_partial`` sums
        ``log(-V_xy)`` only, which ignores the ``G`` and ``V_x V_y`` factors
        and is reliable only for pairs far out in the joint tail.

    The result is flagged ``boundary`` when the optimum sits next to an end
    of the search interval or a likelihood-ratio test cannot tell it apart
    from that end.
    """
    x, y = _check(x_tilde, y_tilde)
    if x.shape != y.shape or x.ndim != 1:
        raise DomainError("x and y must be 1-d arrays of equal length")
    if x.size < MIN_PAIRS:
        raise InsufficientData(f"need at least {MIN_PAIRS} pairs, got {x.size}", x.size)
    if likelihood == "full":
        ll = loglik_full
    elif likelihood == "mixed_partial":
        ll = loglik_mixed_partial
    else:
        raise DomainError(f"unknown likelihood '{likelihood}'")

    def nll(a):
        v = ll(x, y, a)
        return -v if math.isfinite(v) else math.inf

    res = minimize_scalar(nll, bounds=(ALPHA_LO, ALPHA_HI), method="bounded",
                          options={"xatol": xatol, "maxiter": 500})
    a_hat = float(res.x)
    best = -float(res.fun)
    near_lo = a_hat - ALPHA_LO < 1e-3
    near_hi = ALPHA_HI - a_hat < 1e-3
    edge = ALPHA_LO if a_hat < 0.5 else ALPHA_HI
    edge_ll = ll(x, y, edge)
    boundary = bool(near_lo or near_hi or 2.0 * (best - edge_ll) < _LR_BOUNDARY)
    return LogisticModel(a_hat, FitMethod.MLE, best, boundary, bool(res.success), likelihood)
