"""Path-length statistics and the network path change coefficient (NPCC).

Every global quantity is computed on the largest connected component of a
snapshot. Distances come from batched BFS; per-source results are reduced
in source order so the output does not depend on worker scheduling.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict
from typing import Sequence

import numpy as np

from .graph import (
    UNREACHABLE,
    SnapshotGraph,
    bfs_distances,
    largest_component,
    level_counts,
)

DEGENERATE_EPS = 1e-9
EFFECTIVE_QUANTILE = (9, 10)  # 90% of node pairs, as an exact fraction
DMAX_VARIANTS = ("max", "mean")
DEFAULT_BATCH = 256


class DisconnectedGraphError(ValueError):
    pass


@dataclass(frozen=True)
class SnapshotMetrics:
    bin_id: int
    node_count: int
    edge_count: int
    giant_fraction: float
    d_max: float
    d_effective: float
    sp: float
    r: float | None
    mode: str = "exact"
    sample_size: int | None = None
    seed: int | None = None

    @property
    def degenerate(self) -> bool:
        return self.r is None

    def as_dict(self) -> dict:
        return asdict(self)


def _single_source(g: SnapshotGraph, v: int) -> np.ndarray:
    d = bfs_distances(g, v)
    if (d == UNREACHABLE).any():
        raise DisconnectedGraphError(
            "graph is disconnected; reduce it with largest_component() first"
        )
    return d


def eccentricity(g: SnapshotGraph, v: int) -> int:
    """Largest hop distance from ``v`` to any other node."""
    return int(_single_source(g, v).max())


def node_mean_sp(g: SnapshotGraph, v: int) -> float:
    """Mean hop distance from ``v`` to every other node."""
    if g.node_count < 2:
        raise ValueError("mean shortest path needs at least two nodes")
    d = _single_source(g, v)
    return int(d.sum()) / (g.node_count - 1)


@dataclass
class _DistanceSummary:
    """Per-source eccentricities and distance sums plus a pooled histogram.

    Everything is an exact integer; the float metrics come from one division
    each, so they do not depend on batching or summation order.
    """

    ecc: np.ndarray
    sums: np.ndarray
    hist: np.ndarray  # hist[h] = number of (source, target) pairs at distance h
    targets: int  # n - 1, the other end of every per-source mean


def _summarize_batch(g: SnapshotGraph, sources: np.ndarray) -> _DistanceSummary:
    counts = level_counts(g, sources)
    n = g.node_count
    if (counts.sum(axis=0) != n).any():
        raise DisconnectedGraphError(
            "graph is disconnected; reduce it with largest_component() first"
        )
    hops = np.arange(len(counts))
    # deepest non-empty level per source
    ecc = len(counts) - 1 - np.argmax(counts[::-1] > 0, axis=0)
    sums = (hops @ counts).astype(np.int64)
    hist = counts.sum(axis=1)
    hist[0] = 0
    return _DistanceSummary(ecc, sums, hist, n - 1)


def _summarize(
    g: SnapshotGraph, sources: np.ndarray, workers: int = 1, batch: int = DEFAULT_BATCH
) -> _DistanceSummary:
    chunks = [sources[i:i + batch] for i in range(0, len(sources), batch)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: _summarize_batch(g, c), chunks))
    else:
        parts = [_summarize_batch(g, c) for c in chunks]
    width = max(len(p.hist) for p in parts)
    hist = np.zeros(width, dtype=np.int64)
    for p in parts:
        hist[:len(p.hist)] += p.hist
    return _DistanceSummary(
        np.concatenate([p.ecc for p in parts]),
        np.concatenate([p.sums for p in parts]),
        hist,
        parts[0].targets,
    )


def _require_pairs(g: SnapshotGraph) -> None:
    if g.node_count < 2:
        raise ValueError("metric needs a connected graph with at least two nodes")


def _all_sources(g: SnapshotGraph) -> np.ndarray:
    return np.arange(g.node_count, dtype=np.int64)


def _ceil_fraction(count: int, frac: tuple[int, int]) -> int:
    num, den = frac
    return -((-count * num) // den)


def _order_statistic(hist: np.ndarray, rank: int) -> int:
    """``rank``-th smallest value (1-indexed) of the multiset encoded by ``hist``."""
    cum = np.cumsum(hist)
    return int(np.searchsorted(cum, rank))


def _diameter_from(summary: _DistanceSummary, variant: str) -> float:
    if variant == "max":
        return float(summary.ecc.max())
    if variant == "mean":
        return int(summary.ecc.sum()) / len(summary.ecc)
    raise ValueError(f"unknown dmax variant {variant!r}; expected one of {DMAX_VARIANTS}")


def _effective_from(summary: _DistanceSummary) -> int:
    pooled = int(summary.hist.sum())
    return _order_statistic(summary.hist, _ceil_fraction(pooled, EFFECTIVE_QUANTILE))


def _sp_from(summary: _DistanceSummary) -> float:
    # mean of per-source means, as the exact ratio of integer totals
    return int(summary.sums.sum()) / (len(summary.sums) * summary.targets)


def network_diameter(g: SnapshotGraph, variant: str = "max") -> float:
    """Largest eccentricity, or with ``variant="mean"`` the mean eccentricity."""
    _require_pairs(g)
    return _diameter_from(_summarize(g, _all_sources(g)), variant)


def effective_diameter(g: SnapshotGraph) -> int:
    """Smallest hop count covering 90% of unordered node pairs.

    This is the ceil(0.9 * n)-th smallest pair distance, n = |V|(|V|-1)/2;
    no interpolation between hop values.
    """
    _require_pairs(g)
    hist = _summarize(g, _all_sources(g)).hist // 2
    return _order_statistic(hist, _ceil_fraction(int(hist.sum()), EFFECTIVE_QUANTILE))


def mean_shortest_path(g: SnapshotGraph) -> float:
    _require_pairs(g)
    return _sp_from(_summarize(g, _all_sources(g)))


def npcc(d_max: float, d_effective: float, sp: float, check: bool = True) -> float | None:
    """``(d_max - d_effective) / (d_max - sp)``, or None when the denominator vanishes.

    With ``check`` the inputs must satisfy ``d_max >= d_effective`` and
    ``d_max >= sp``; a violation means the diameter variant cannot bound the
    other two and raises ``ValueError``.
    """
    if check and (d_max < d_effective - DEGENERATE_EPS or d_max < sp - DEGENERATE_EPS):
        raise ValueError(
            f"d_max={d_max} must dominate d_effective={d_effective} and sp={sp}"
        )
    denom = d_max - sp
    if abs(denom) < DEGENERATE_EPS:
        return None
    return (d_max - d_effective) / denom


def _degenerate(g: SnapshotGraph, giant_fraction: float, mode: str,
                sample_size: int | None, seed: int | None) -> SnapshotMetrics:
    nan = float("nan")
    return SnapshotMetrics(g.bin_id, g.node_count, g.edge_count, giant_fraction,
                           nan, nan, nan, None, mode, sample_size, seed)


def _compose(g: SnapshotGraph, giant: SnapshotGraph, summary: _DistanceSummary,
             dmax_variant: str, mode: str, sample_size: int | None,
             seed: int | None) -> SnapshotMetrics:
    d_max = _diameter_from(summary, dmax_variant)
    d_eff = float(_effective_from(summary))
    sp = _sp_from(summary)
    # the mean-eccentricity diameter need not dominate d_effective; report r raw
    r = npcc(d_max, d_eff, sp, check=dmax_variant == "max")
    return SnapshotMetrics(g.bin_id, g.node_count, g.edge_count,
                           giant.node_count / g.node_count, d_max, d_eff, sp, r,
                           mode, sample_size, seed)


def snapshot_metrics(g: SnapshotGraph, dmax_variant: str = "max",
                     workers: int = 1) -> SnapshotMetrics:
    """Exact D_max, D_effective, SP and r on the giant component of ``g``."""
    if dmax_variant not in DMAX_VARIANTS:
        raise ValueError(f"unknown dmax variant {dmax_variant!r}")
    giant = largest_component(g)
    frac = giant.node_count / g.node_count if g.node_count else 0.0
    if giant.node_count < 2:
        return _degenerate(g, frac, "exact", None, None)
    summary = _summarize(giant, _all_sources(giant), workers)
    return _compose(g, giant, summary, dmax_variant, "exact", None, None)


def sample_sources(n: int, sample_size: int, seed: int) -> np.ndarray:
    """Sorted distinct source ids; all nodes when ``sample_size >= n``."""
    if sample_size >= n:
        return np.arange(n, dtype=np.int64)
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n, size=sample_size, replace=False)).astype(np.int64)


def snapshot_metrics_sampled(g: SnapshotGraph, sample_size: int, seed: int,
                             dmax_variant: str = "max",
                             workers: int = 1) -> SnapshotMetrics:
    """Estimate the snapshot metrics from BFS out of a uniform sample of sources.

    SP is the mean of the sampled per-source means, D_effective the 90%
    order statistic of the pooled sampled distances, and D_max the largest
    distance seen (a lower bound on the true diameter). With
    ``sample_size >= |V|`` the values equal :func:`snapshot_metrics`.
    """
    if sample_size < 1:
        raise ValueError("sample_size must be >= 1")
    if dmax_variant not in DMAX_VARIANTS:
        raise ValueError(f"unknown dmax variant {dmax_variant!r}")
    giant = largest_component(g)
    frac = giant.node_count / g.node_count if g.node_count else 0.0
    if giant.node_count < 2:
        return _degenerate(g, frac, "sampled", sample_size, seed)
    sources = sample_sources(giant.node_count, sample_size, seed)
    summary = _summarize(giant, sources, workers)
    return _compose(g, giant, summary, dmax_variant, "sampled", sample_size, seed)


def compute_metrics(g: SnapshotGraph, sample_size: int | None = None, seed: int = 0,
                    dmax_variant: str = "max", workers: int = 1) -> SnapshotMetrics:
    """Exact metrics when ``sample_size`` is None, sampled otherwise."""
    if sample_size is None:
        return snapshot_metrics(g, dmax_variant, workers)
    return snapshot_metrics_sampled(g, sample_size, seed, dmax_variant, workers)


def metrics_many(graphs: Sequence[SnapshotGraph], **kwargs) -> list[SnapshotMetrics]:
    return [compute_metrics(g, **kwargs) for g in graphs]
