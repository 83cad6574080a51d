import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jointfade.core import PowerSeries
from jointfade.decluster import Cluster, cluster_minima, decluster, decluster_arrays
from jointfade.errors import DomainError


def ser(values):
    return PowerSeries.from_values(values)


def test_hand_trace():
    got = decluster(ser([-16, -17, -14, -14, -18]), -15.0, 1)
    assert got == [Cluster(0, 1, -17.0, 1), Cluster(4, 4, -18.0, 4)]
    assert cluster_minima(got) == [(1, -17.0), (4, -18.0)]


def test_all_above_threshold():
    assert decluster(ser([-1, -2, -3]), -15.0, 2) == []
    assert cluster_minima([]) == []


def test_single_run_ties_to_earliest():
    got = decluster(ser([-20, -20, -20]), -15.0, 2)
    assert got == [Cluster(0, 2, -20.0, 0)]
    assert len(cluster_minima(got)) == 1


def test_gap_must_exceed_mg():
    s = ser([-20, -10, -10, -21])
    assert len(decluster(s, -15.0, 2)) == 1
    assert len(decluster(s, -15.0, 1)) == 2


def test_arrays_and_list_agree():
    arr = decluster_arrays(ser([-16, -17, -14, -14, -18]), -15.0, 1)
    assert cluster_minima(arr) == [(1, -17.0), (4, -18.0)]


def test_bad_mg():
    with pytest.raises(DomainError):
        decluster(ser([-20.0]), -15.0, 0)


series = st.lists(st.integers(-30, 0), min_size=1, max_size=80)


@settings(max_examples=200, deadline=None)
@given(series, st.integers(1, 6))
def test_cover_and_separation(vals, mg):
    u = -15.0
    v = np.array(vals, dtype=float)
    cl = decluster(ser(v), u, mg)
    below = set(np.flatnonzero(v < u).tolist())
    covered = [i for c in cl for i in range(c.start, c.end + 1) if v[i] < u]
    assert sorted(covered) == sorted(below)
    assert len(covered) == len(set(covered))
    for a, b in zip(cl, cl[1:]):
        assert b.start - a.end - 1 > mg
    for c in cl:
        assert c.minimum == v[c.start:c.end + 1].min()
        assert v[c.min_index] == c.minimum


@settings(max_examples=200, deadline=None)
@given(series, st.integers(1, 6))
def test_monotone_merging(vals, mg):
    s = ser(vals)
    assert len(decluster(s, -15.0, mg + 1)) <= len(decluster(s, -15.0, mg))
