import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jointfade.core import GpdParams, gpd_quantile
from jointfade.errors import DomainError
from jointfade.transforms import (FRECHET_CAP, estimate_zeta, frechet_margin_ks,
                                  frechet_transform, frechet_transform_counted,
                                  pickands_inverse, pickands_transform)


def test_near_threshold_limits():
    x = np.nextafter(-15.0, -np.inf)
    assert frechet_transform(x, GpdParams(-0.2, 5.0, -15.0, 0.05)) == pytest.approx(
        -1 / math.log(0.95), rel=1e-12)
    assert frechet_transform(x, GpdParams(-0.2, 5.0, -15.0, 0.5)) == pytest.approx(
        1.4427, abs=5e-5)


def test_endpoint_is_capped():
    p = GpdParams(-0.5, 2.0, 0.0, 0.1)
    v, k = frechet_transform_counted(np.array([-4.0, -1.0]), p)
    assert v[0] == FRECHET_CAP and k == 1
    assert math.isfinite(v[1])


def test_rejects_values_at_or_above_u():
    with pytest.raises(DomainError):
        frechet_transform(-15.0, GpdParams(-0.2, 5.0, -15.0))


def test_joint_zeta_is_exact_unit_frechet():
    p = GpdParams(-0.2, 5.0, -15.0, 1.0)
    l = gpd_quantile(np.random.default_rng(1).random(20_000), p)
    v = frechet_transform(-15.0 - l[l > 0], p)
    assert frechet_margin_ks(v) < 1.36 / math.sqrt(v.size)


def test_conditional_reference():
    p = GpdParams(-0.2, 5.0, -15.0, 0.05)
    l = gpd_quantile(np.random.default_rng(2).random(20_000), p)
    v = frechet_transform(-15.0 - l[l > 0], p)
    assert frechet_margin_ks(v, zeta=0.05) < 1.36 / math.sqrt(v.size)
    assert frechet_margin_ks(v) > 0.5


@settings(max_examples=100, deadline=None)
@given(st.floats(-0.8, 0.5), st.floats(0.5, 10.0), st.floats(0.01, 1.0))
def test_strictly_decreasing_in_x(xi, s, zeta):
    p = GpdParams(xi, s, 0.0, zeta)
    end = min(p.endpoint, 20 * s)
    x = -np.linspace(end * 0.9, end * 1e-3, 50)  # ascending
    v = frechet_transform(x, p)
    below_cap = v < 1e12  # deep values with zeta near 1 saturate at the cap
    assert np.all(np.diff(v) <= 0)
    assert np.all(np.diff(v[below_cap]) < 0)


def test_ks_examples():
    z = 1.0 / np.random.default_rng(3).exponential(1.0, 10_000)
    assert frechet_margin_ks(z) < 0.02
    assert frechet_margin_ks([-1 / math.log(0.5)]) == pytest.approx(0.5)
    assert frechet_margin_ks(np.full(10, 1e12)) > 0.99


def test_estimate_zeta():
    assert estimate_zeta([-20, -10, -16, 0], -15.0) == 0.5
    with pytest.raises(DomainError):
        estimate_zeta([0.0, 1.0], -15.0)


def test_pickands_examples():
    assert pickands_transform(2.0, 2.0, 7)[0] == 0.5
    w, r = pickands_transform(3.0, 1.0, 10)
    assert (w, r) == (pytest.approx(0.75), pytest.approx(-0.4))
    assert pickands_inverse(0.75, -0.4, 10) == (pytest.approx(3.0), pytest.approx(1.0))
    assert pickands_inverse(0.5, -0.2, 10) == (pytest.approx(1.0), pytest.approx(1.0))


@pytest.mark.parametrize("w,r", [(0.0, -1.0), (1.0, -1.0), (0.5, 0.0), (0.5, 0.3)])
def test_pickands_inverse_domain(w, r):
    with pytest.raises(DomainError):
        pickands_inverse(w, r, 10)


pos = st.floats(1e-6, 1e6)


@settings(max_examples=300, deadline=None)
@given(pos, st.floats(-3.0, 3.0), st.integers(1, 10_000))
def test_pickands_roundtrip(x, log_ratio, n):
    # 1 - omega carries an absolute rounding error of one ulp, so the smaller
    # component is only recoverable to eps * (x + y) / min(x, y)
    y = x * 10.0**log_ratio
    w, r = pickands_transform(x, y, n)
    x2, y2 = pickands_inverse(w, r, n)
    assert x2 == pytest.approx(x, rel=1e-12) and y2 == pytest.approx(y, rel=1e-12)
    w2, r2 = pickands_transform(x2, y2, n)
    assert w2 == pytest.approx(w, rel=1e-12) and r2 == pytest.approx(r, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(pos, pos, st.floats(1e-3, 1e3))
def test_angle_scale_free(x, y, c):
    w1, r1 = pickands_transform(x, y, 5)
    w2, r2 = pickands_transform(c * x, c * y, 5)
    assert w2 == pytest.approx(w1, rel=1e-12)
    assert r2 == pytest.approx(c * r1, rel=1e-12)
