"""Domain types and closed-form GEV/GPD expressions.

All tail expressions work on nonnegative *depths* ``l = u - x`` below a
threshold ``u`` (lower-tail orientation). Conversion between dBm and depth
happens at module boundaries only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

#: |xi| below this switches to the exponential / Gumbel limit.
XI_EPS = 1e-8


@dataclass(frozen=True)
class PowerSeries:
    """Received power samples of one receiver.

    Parameters
    ----------
    t : np.ndarray
        Integer time steps, strictly increasing.
    power : np.ndarray
        Received power in dBm, finite.
    resolution : float
        Seconds per time step.
    """

    t: np.ndarray
    power: np.ndarray
    resolution: float = 1.0

    def __post_init__(self):
        t_ = np.asarray(self.t, dtype=np.int64)
        p_ = np.asarray(self.power, dtype=float)
        if t_.ndim != 1 or p_.shape != t_.shape:
            raise DomainError("t and power must be 1-d arrays of equal length")
        if t_.size > 1 and np.any(np.diff(t_) <= 0):
            raise DomainError("time steps must be strictly increasing")
        if not np.all(np.isfinite(p_)):
            raise DomainError("power values must be finite")
        object.__setattr__(self, "t", t_)
        object.__setattr__(self, "power", p_)

    def __len__(self) -> int:
        return int(self.t.size)

    @classmethod
    def from_values(cls, power, resolution: float = 1.0, start: int = 0) -> "PowerSeries":
        power = np.asarray(power, dtype=float)
        return cls(np.arange(start, start + power.size), power, resolution)


@dataclass(frozen=True)
class GevParams:
    mu: float
    sigma: float
    xi: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"GEV scale must be positive, got {self.sigma}")


@dataclass(frozen=True)
class GpdParams:
    """Fitted lower-tail model.

    ``zeta`` is the probability of falling below ``u``. The value 1 is
    allowed and means the depths are modelled relative to a population that
    lies entirely in the tail (the joint-tail sample).
    """

    xi: float
    sigma_tilde: float
    u: float = 0.0
    zeta: float = 1.0

    def __post_init__(self):
        if not self.sigma_tilde > 0:
            raise DomainError(f"GPD scale must be positive, got {self.sigma_tilde}")
        if not 0.0 < self.zeta <= 1.0:
            raise DomainError(f"zeta must lie in (0, 1], got {self.zeta}")

    @property
    def endpoint(self) -> float:
        return gpd_support_endpoint(self)


@dataclass(frozen=True)
class Exceedance:
    l: float
    t: int

    def __post_init__(self):
        if not self.l >= 0:
            raise DomainError(f"exceedance depth must be >= 0, got {self.l}")


def _log1p_ratio(x: np.ndarray) -> np.ndarray:
    """log1p(x) / x, continuous through x = 0."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-4
    xs = x[small]
    out[small] = 1.0 - xs / 2.0 + xs * xs / 3.0 - xs**3 / 4.0
    xl = x[~small]
    out[~small] = np.log1p(xl) / xl
    return out


def gev_cdf(z, p: GevParams):
    """GEV distribution function; out-of-support arguments map to 0 or 1."""
    z = np.asarray(z, dtype=float)
    y = (z - p.mu) / p.sigma
    if abs(p.xi) < XI_EPS:
        out = np.exp(-np.exp(-y))
    else:
        b = 1.0 + p.xi * y
        inside = b > 0
        safe = np.where(inside, b, 1.0)
        edge = 0.0 if p.xi > 0 else 1.0
        out = np.where(inside, np.exp(-np.exp(-np.log(safe) / p.xi)), edge)
    return out[()] if np.ndim(out) == 0 else out


def gpd_cdf(l, p: GpdParams):
    """GPD distribution function of depth ``l``.

    Returns exactly 1 at and beyond the finite endpoint of a negative-shape fit.
    """
    l = np.asarray(l, dtype=float)
    if np.any(l < 0) or np.any(np.isnan(l)):
        raise DomainError("exceedance depths must be nonnegative")
    x = p.xi * l / p.sigma_tilde
    if abs(p.xi) < XI_EPS:
        out = -np.expm1(-l / p.sigma_tilde)
    else:
        beyond = x <= -1.0
        xs = np.where(beyond, 0.0, x)
        out = -np.expm1(-np.log1p(xs) / p.xi)
        out = np.where(beyond, 1.0, out)
    return out[()] if np.ndim(out) == 0 else out


def gpd_survival(l, p: GpdParams):
    """1 - gpd_cdf, computed without cancellation."""
    l = np.asarray(l, dtype=float)
    if np.any(l < 0):
        raise DomainError("exceedance depths must be nonnegative")
    if abs(p.xi) < XI_EPS:
        out = np.exp(-l / p.sigma_tilde)
    else:
        x = p.xi * l / p.sigma_tilde
        beyond = x <= -1.0
        out = np.exp(-np.log1p(np.where(beyond, 0.0, x)) / p.xi)
        out = np.where(beyond, 0.0, out)
    return out[()] if np.ndim(out) == 0 else out


def gpd_quantile(pr, p: GpdParams):
    """Inverse of :func:`gpd_cdf` on [0, 1)."""
    pr = np.asarray(pr, dtype=float)
    if np.any(pr < 0) or np.any(pr >= 1) or np.any(np.isnan(pr)):
        raise DomainError("probability must lie in [0, 1)")
    if abs(p.xi) < XI_EPS:
        out = -p.sigma_tilde * np.log1p(-pr)
    else:
        out = p.sigma_tilde / p.xi * np.expm1(-p.xi * np.log1p(-pr))
    return out[()] if np.ndim(out) == 0 else out


def gpd_support_endpoint(p: GpdParams) -> float:
    if p.xi < 0:
        return -p.sigma_tilde / p.xi
    return math.inf


def gpd_log_likelihood(excesses, xi: float, sigma_tilde: float) -> float:
    """Sum of GPD log densities; ``-inf`` outside the support."""
    l = np.asarray(excesses, dtype=float)
    if l.size == 0:
        raise DomainError("empty excess sample")
    if not sigma_tilde > 0:
        raise DomainError("scale must be positive")
    if np.any(l < 0):
        raise DomainError("exceedance depths must be nonnegative")
    tt = l / sigma_tilde
    x = xi * tt
    if np.any(x <= -1.0):
        return -math.inf
    # log(1 + x) * (1 + 1/xi) written so that xi -> 0 is continuous
    return float(-l.size * math.log(sigma_tilde) - np.sum(np.log1p(x) + tt * _log1p_ratio(x)))
