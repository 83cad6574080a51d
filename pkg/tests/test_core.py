import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jointfade.core import (Exceedance, GevParams, GpdParams, PowerSeries, gev_cdf, gpd_cdf,
                            gpd_log_likelihood, gpd_quantile, gpd_support_endpoint, gpd_survival)
from jointfade.errors import DomainError


def mp_gev(z, mu, sigma, xi):
    mpmath.mp.dps = 50
    y = (mpmath.mpf(z) - mu) / sigma
    return float(mpmath.exp(-(1 + mpmath.mpf(xi) * y) ** (-1 / mpmath.mpf(xi))))


def test_gev_bracket_one():
    assert gev_cdf(3.0, GevParams(3.0, 7.0, 0.5)) == pytest.approx(math.exp(-1), abs=1e-15)


def test_gev_gumbel_limit():
    assert gev_cdf(0.0, GevParams(0.0, 1.0, 0.0)) == pytest.approx(0.367879441171, abs=1e-12)
    assert gev_cdf(0.0, GevParams(0.0, 1.0, 1e-10)) == pytest.approx(math.exp(-1), abs=1e-9)


def test_gev_against_high_precision():
    got = gev_cdf(1.0, GevParams(0.0, 2.0, 0.25))
    assert got == pytest.approx(mp_gev(1, 0, 2, 0.25), rel=1e-14)
    assert got == pytest.approx(0.5356388796484046, rel=1e-14)


def test_gev_outside_support():
    assert gev_cdf(-10.0, GevParams(0.0, 1.0, 0.5)) == 0.0
    assert gev_cdf(10.0, GevParams(0.0, 1.0, -0.5)) == 1.0


def test_gev_rejects_bad_scale():
    with pytest.raises(DomainError):
        GevParams(0.0, 0.0, 0.1)


def test_gpd_cdf_examples():
    assert gpd_cdf(0.0, GpdParams(-0.2, 5.0)) == 0.0
    assert gpd_cdf(1.0, GpdParams(-0.5, 2.0)) == pytest.approx(0.4375, abs=1e-15)
    mpmath.mp.dps = 50
    xi, s = mpmath.mpf("-0.1469"), mpmath.mpf("4.0367")
    want = float(1 - (1 + xi) ** (-1 / xi))
    assert gpd_cdf(4.0367, GpdParams(-0.1469, 4.0367)) == pytest.approx(want, rel=1e-13)


def test_gpd_cdf_exactly_one_past_endpoint():
    p = GpdParams(-0.5, 2.0)
    assert gpd_cdf(4.0, p) == 1.0
    assert gpd_cdf(7.0, p) == 1.0
    assert gpd_survival(4.0, p) == 0.0


def test_gpd_cdf_rejects_negative_depth():
    with pytest.raises(DomainError):
        gpd_cdf(-0.1, GpdParams(0.1, 1.0))
    with pytest.raises(DomainError):
        gpd_survival(-0.1, GpdParams(0.1, 1.0))


def test_gpd_exponential_continuity():
    l = np.linspace(0, 30, 301)
    p0 = GpdParams(0.0, 3.0)
    p1 = GpdParams(1e-9, 3.0)
    assert np.max(np.abs(gpd_cdf(l, p1) - (1 - np.exp(-l / 3.0)))) < 1e-7
    assert np.max(np.abs(gpd_cdf(l, p0) - (1 - np.exp(-l / 3.0)))) < 1e-15


def test_gpd_quantile_examples():
    p = GpdParams(-0.5, 2.0)
    assert gpd_quantile(0.0, p) == 0.0
    assert gpd_quantile(0.4375, p) == pytest.approx(1.0, rel=1e-14)
    q = gpd_quantile(0.99, GpdParams(0.3, 1.7))
    assert abs(gpd_cdf(q, GpdParams(0.3, 1.7)) - 0.99) < 1e-12


@pytest.mark.parametrize("pr", [-0.1, 1.0, 1.5, float("nan")])
def test_gpd_quantile_domain(pr):
    with pytest.raises(DomainError):
        gpd_quantile(pr, GpdParams(0.1, 1.0))


def test_support_endpoint():
    assert gpd_support_endpoint(GpdParams(-0.5, 2.0)) == 4.0
    assert gpd_support_endpoint(GpdParams(0.1, 1.0)) == math.inf
    assert gpd_support_endpoint(GpdParams(-0.1469, 4.0367)) == pytest.approx(27.4792, abs=5e-5)


def test_log_likelihood_examples():
    assert gpd_log_likelihood([0.0], 0.0, 1.0) == 0.0
    assert gpd_log_likelihood([1.0, 2.0], 0.0, 1.0) == pytest.approx(-3.0, abs=1e-15)
    assert gpd_log_likelihood([5.0], -0.5, 2.0) == -math.inf
    with pytest.raises(DomainError):
        gpd_log_likelihood([], 0.1, 1.0)


def test_log_likelihood_matches_scipy():
    from scipy.stats import genpareto
    l = np.array([0.1, 0.5, 2.0, 3.3])
    for xi in (-0.3, 0.0, 0.4):
        assert gpd_log_likelihood(l, xi, 1.7) == pytest.approx(
            np.sum(genpareto.logpdf(l, xi, scale=1.7)), rel=1e-12)


params = st.tuples(st.floats(-0.9, 0.9), st.floats(0.1, 20.0))


@settings(max_examples=200, deadline=None)
@given(params, st.floats(0.0, 0.999999))
def test_quantile_cdf_roundtrip(p, pr):
    gp = GpdParams(p[0], p[1])
    q = gpd_quantile(pr, gp)
    assert gpd_cdf(q, gp) == pytest.approx(pr, rel=1e-10, abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(params)
def test_cdf_monotone(p):
    gp = GpdParams(p[0], p[1])
    end = min(gpd_support_endpoint(gp), 50 * p[1])
    l = np.linspace(0, end * 1.2, 200)
    assert np.all(np.diff(gpd_cdf(l, gp)) >= 0)


def test_power_series_validation():
    s = PowerSeries.from_values([-1.0, -2.0])
    assert len(s) == 2 and s.t.tolist() == [0, 1]
    with pytest.raises(DomainError):
        PowerSeries(np.array([0, 0]), np.array([1.0, 2.0]))
    with pytest.raises(DomainError):
        PowerSeries(np.array([0, 1]), np.array([1.0, np.nan]))
    with pytest.raises(DomainError):
        Exceedance(-1.0, 0)
    with pytest.raises(DomainError):
        GpdParams(0.1, 1.0, zeta=0.0)
