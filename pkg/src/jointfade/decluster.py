"""Runs declustering of a dependent power series into cluster minima."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PowerSeries
from .errors import DomainError


@dataclass(frozen=True)
class Cluster:
    start: int
    end: int
    minimum: float
    min_index: int


@dataclass(frozen=True)
class ClusterArrays:
    """Column view of a cluster sequence (what the pipeline passes around)."""

    start: np.ndarray
    end: np.ndarray
    minimum: np.ndarray
    min_index: np.ndarray

    def __len__(self) -> int:
        return int(self.minimum.size)

    def to_list(self) -> list[Cluster]:
        return [Cluster(int(a), int(b), float(m), int(i))
                for a, b, m, i in zip(self.start, self.end, self.minimum, self.min_index)]


def decluster_arrays(series: PowerSeries, u: float, mg: int) -> ClusterArrays:
    """Vectorised declustering.

    A cluster opens at a sample strictly below ``u``. Once a sample at or
    above ``u`` is seen the cluster stays open for ``mg`` further samples and
    closes only if none of them falls below ``u``; a closing gap is therefore
    at least ``mg + 1`` samples long. Ties for the minimum resolve to the
    earliest sample.
    """
    if mg < 1:
        raise DomainError(f"mg must be >= 1, got {mg}")
    if len(series) == 0:
        raise DomainError("empty series")
    below = np.flatnonzero(series.power < u)
    if below.size == 0:
        e = np.empty(0, dtype=np.int64)
        return ClusterArrays(e, e.copy(), np.empty(0), e.copy())
    gaps = np.diff(below) - 1
    opens = np.concatenate([[0], np.flatnonzero(gaps > mg) + 1])
    closes = np.concatenate([opens[1:] - 1, [below.size - 1]])
    values = series.power[below]
    minima = np.minimum.reduceat(values, opens)
    cid = np.repeat(np.arange(opens.size), np.diff(np.concatenate([opens, [below.size]])))
    hit = np.flatnonzero(values == minima[cid])
    _, first = np.unique(cid[hit], return_index=True)
    t = series.t
    return ClusterArrays(
        start=t[below[opens]],
        end=t[below[closes]],
        minimum=minima,
        min_index=t[below[hit[first]]],
    )


def decluster(series: PowerSeries, u: float, mg: int) -> list[Cluster]:
    return decluster_arrays(series, u, mg).to_list()


def cluster_minima(clusters) -> list[tuple[int, float]]:
    """(time step, dBm) of each cluster minimum, in cluster order."""
    if isinstance(clusters, ClusterArrays):
        return [(int(i), float(m)) for i, m in zip(clusters.min_index, clusters.minimum)]
    return [(c.min_index, c.minimum) for c in clusters]
