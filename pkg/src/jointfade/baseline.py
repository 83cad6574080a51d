"""Average-statistics baseline: margin ranking and a bivariate Gaussian extrapolation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special, stats

from .errors import DomainError, InsufficientData

MIN_SAMPLES = 100
#: Larger samples are thinned to this size, evenly strided, before ranking.
MAX_RANK_SAMPLES = 100_000
AIC_TIE = 2.0
_LN10 = math.log(10.0)


@dataclass(frozen=True)
class MarginCandidate:
    name: str
    params: dict
    loglik: float
    k: int
    aic: float
    bic: float


@dataclass(frozen=True)
class MarginRanking:
    """Candidates sorted by AIC; ``tie`` marks a runner-up within 2 AIC units."""

    candidates: list[MarginCandidate]
    best_aic: str
    best_bic: str
    tie: bool


def _candidate(name, params, ll, k, n):
    ll = float(ll)
    return MarginCandidate(name, params, ll, k, 2 * k - 2 * ll, k * math.log(n) - 2 * ll)


def fit_margin_candidates(samples) -> MarginRanking:
    """Fit Gaussian, Rayleigh and Rician margins to dBm samples by maximum likelihood.

    Rayleigh and Rician are fading laws on amplitude; their likelihoods are
    taken on the dBm scale through the change-of-variables Jacobian so the
    three are comparable. Samples beyond ``MAX_RANK_SAMPLES`` are thinned
    by an even stride, which keeps the ranking deterministic.
    """
    x = np.asarray(samples, dtype=float)
    if x.size < MIN_SAMPLES:
        raise InsufficientData(f"need at least {MIN_SAMPLES} samples, got {x.size}", x.size)
    if x.size > MAX_RANK_SAMPLES:
        x = x[:: -(-x.size // MAX_RANK_SAMPLES)]
    n = x.size
    if not np.std(x) > 0:
        raise DomainError("degenerate variance")
    out = []
    mu, sd = float(np.mean(x)), float(np.std(x))
    out.append(_candidate("gaussian", {"mu": mu, "sigma": sd},
                          np.sum(stats.norm.logpdf(x, mu, sd)), 2, n))

    # power in mW; log |dP/dx| = log P + log(ln10 / 10)
    p = 10.0 ** (x / 10.0)
    jac_p = np.log(p) + math.log(_LN10 / 10.0)
    omega = float(np.mean(p))
    ll_ray = np.sum(-math.log(omega) - p / omega + jac_p)
    out.append(_candidate("rayleigh", {"omega_mw": omega}, ll_ray, 1, n))

    amp = np.sqrt(p)
    jac_a = np.log(amp) + math.log(_LN10 / 20.0)
    b, _, scale = stats.rice.fit(amp, floc=0.0)
    ll_rice = np.sum(stats.rice.logpdf(amp, b, 0.0, scale) + jac_a)
    out.append(_candidate("rician", {"b": float(b), "scale": float(scale)}, ll_rice, 2, n))

    by_aic = sorted(out, key=lambda c: c.aic)
    by_bic = sorted(out, key=lambda c: c.bic)
    tie = by_aic[1].aic - by_aic[0].aic <= AIC_TIE + 1e-9
    return MarginRanking(by_aic, by_aic[0].name, by_bic[0].name, bool(tie))


@dataclass(frozen=True)
class BivariateGaussian:
    mu_x: float
    mu_y: float
    sd_x: float
    sd_y: float
    rho: float
    degenerate: bool = False


def fit_bivariate_gaussian(x, y) -> BivariateGaussian:
    """Moment estimates; ``|rho| = 1`` is returned flagged as degenerate."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise DomainError("need paired samples of at least 2 values")
    sx, sy = float(np.std(x)), float(np.std(y))
    if sx == 0 or sy == 0:
        raise DomainError("degenerate variance")
    rho = float(np.clip(np.mean((x - x.mean()) * (y - y.mean())) / (sx * sy), -1.0, 1.0))
    degenerate = abs(rho) > 1.0 - 1e-12
    if degenerate:
        rho = math.copysign(1.0, rho)
    return BivariateGaussian(float(x.mean()), float(y.mean()), sx, sy, rho, degenerate)


def bvn_cdf(a: float, b: float, rho: float) -> float:
    """Standard bivariate normal CDF by 1-d quadrature of the conditional form."""
    if not -1.0 <= rho <= 1.0:
        raise DomainError("rho must lie in [-1, 1]")
    if rho == 0.0:
        return float(stats.norm.cdf(a) * stats.norm.cdf(b))
    if rho == 1.0:
        return float(stats.norm.cdf(min(a, b)))
    if rho == -1.0:
        return float(max(0.0, stats.norm.cdf(a) + stats.norm.cdf(b) - 1.0))
    if a > b:
        a, b = b, a  # integrate over the tighter limit
    if a == -math.inf or b == -math.inf:
        return 0.0
    s = math.sqrt(1.0 - rho * rho)

    c = 1.0 / math.sqrt(2.0 * math.pi)
    ndtr, exp = special.ndtr, math.exp

    def f(t):
        return c * exp(-0.5 * t * t) * ndtr((b - rho * t) / s)

    # relative tolerance only: deep-tail values sit far below any absolute floor.
    # Breakpoints at multiples of the decay width 1/|a| resolve the peak at t = a.
    lo = min(a - 10.0, -40.0)
    w = 1.0 / max(1.0, abs(a))
    pts = [p for p in (a - 40 * w, a - 10 * w, a - 3 * w, a - w) if p > lo]
    val, _ = integrate.quad(f, lo, a, points=pts or None, epsabs=0.0, epsrel=1e-12, limit=400)
    return float(min(max(val, 0.0), 1.0))


def extrapolated_joint_cdf(params: BivariateGaussian, x, y):
    """Fitted bivariate normal CDF at dBm arguments, deep tails included."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    a = (xa - params.mu_x) / params.sd_x
    b = (ya - params.mu_y) / params.sd_y
    a, b = np.broadcast_arrays(a, b)
    out = np.array([bvn_cdf(float(p), float(q), params.rho) for p, q in zip(a.ravel(), b.ravel())])
    out = out.reshape(a.shape)
    return float(out) if out.ndim == 0 else out
