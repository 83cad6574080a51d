"""Unit-Fréchet marginal standardisation and the pseudo-polar (Pickands) map."""

from __future__ import annotations

import logging

import numpy as np
from scipy.stats import kstest

from .core import GpdParams, gpd_survival
from .errors import DomainError

logger = logging.getLogger(__name__)

#: Transformed values are capped here when a fade lies beyond a finite endpoint.
FRECHET_CAP = 1e12


def estimate_zeta(power, u: float) -> float:
    """Fraction of raw samples strictly below ``u``."""
    p = np.asarray(power, dtype=float)
    if p.size == 0:
        raise DomainError("empty sample")
    z = float(np.mean(p < u))
    if z == 0.0:
        raise DomainError(f"no sample below u={u}")
    return z


def frechet_transform_counted(x, p: GpdParams, cap: float = FRECHET_CAP):
    """Like :func:`frechet_transform` but also returns how many values were capped."""
    x = np.asarray(x, dtype=float)
    if np.any(x >= p.u) or np.any(np.isnan(x)):
        raise DomainError("values must lie strictly below the threshold")
    s = gpd_survival(p.u - x, p)
    with np.errstate(divide="ignore"):
        out = -1.0 / np.log1p(-p.zeta * np.asarray(s, dtype=float))
    over = ~(out <= cap)
    n_clamped = int(np.count_nonzero(over))
    if n_clamped:
        logger.warning("%d value(s) beyond the GPD endpoint capped at %g", n_clamped, cap)
        out = np.where(over, cap, out)
    return (out[()] if np.ndim(out) == 0 else out), n_clamped


def frechet_transform(x, p: GpdParams, cap: float = FRECHET_CAP):
    """Map dBm values below ``p.u`` to the unit-Fréchet scale.

    Deeper fades map to larger values. With ``zeta = 1`` the GPD-conditional
    sample maps exactly onto unit Fréchet.
    """
    return frechet_transform_counted(x, p, cap)[0]


def frechet_margin_ks(transformed, zeta: float | None = None) -> float:
    """Kolmogorov–Smirnov distance to the unit-Fréchet CDF.

    With ``zeta`` given, the reference is the unit-Fréchet law conditioned on
    the tail event ``X < u`` that has probability ``zeta``.
    """
    v = np.asarray(transformed, dtype=float).ravel()
    if v.size == 0:
        raise DomainError("empty sample")
    if np.any(~(v > 0)):
        raise DomainError("transformed values must be positive")
    if zeta is None:
        def cdf(z):
            return np.exp(-1.0 / z)
    else:
        if not 0 < zeta <= 1:
            raise DomainError("zeta must lie in (0, 1]")

        def cdf(z):
            return np.clip(1.0 + np.expm1(-1.0 / z) / zeta, 0.0, 1.0)
    return float(kstest(v, cdf).statistic)


def pickands_transform(x_tilde, y_tilde, n: int):
    """(omega, r) with ``r = -(x + y) / n`` and ``omega = x / (x + y)``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    x = np.asarray(x_tilde, dtype=float)
    y = np.asarray(y_tilde, dtype=float)
    if np.any(~(x > 0)) or np.any(~(y > 0)) or not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DomainError("Fréchet components must be positive and finite")
    s = x + y
    omega = x / s
    r = -s / n
    if np.ndim(omega) == 0:
        return float(omega), float(r)
    return omega, r


def pickands_inverse(omega, r, n: int):
    """Inverse of :func:`pickands_transform`: ``(-n r omega, -n r (1 - omega))``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    w = np.asarray(omega, dtype=float)
    rr = np.asarray(r, dtype=float)
    if np.any(rr == 0):
        raise DomainError("r = 0 is degenerate")
    if np.any(rr > 0):
        raise DomainError("r must be negative")
    if np.any(~(w > 0)) or np.any(~(w < 1)):
        raise DomainError("omega must lie strictly inside (0, 1) for positive components")
    x = -n * rr * w
    y = -n * rr * (1.0 - w)
    if np.ndim(x) == 0:
        return float(x), float(y)
    return x, y
