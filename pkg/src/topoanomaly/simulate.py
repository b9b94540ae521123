"""Scale-free graph generation, node-removal attacks and labeled benchmark streams."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .graph import SnapshotGraph, from_id_edges, induced_subgraph
from .metrics import SnapshotMetrics, compute_metrics


class Strategy(str, Enum):
    TARGETED_ADAPTIVE = "targeted"
    TARGETED_STATIC = "static"
    RANDOM = "random"


@dataclass(frozen=True)
class AttackSchedule:
    strategy: Strategy = Strategy.TARGETED_ADAPTIVE
    step_fraction: float = 0.005
    max_fraction: float = 0.15
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        if not 0 < self.step_fraction <= self.max_fraction <= 1:
            raise ValueError("need 0 < step_fraction <= max_fraction <= 1")

    @property
    def steps(self) -> int:
        # tolerate 0.15 / 0.005 == 29.999999999999996
        return int(math.floor(self.max_fraction / self.step_fraction + 1e-9))

    def step_size(self, n: int) -> int:
        return math.ceil(self.step_fraction * n - 1e-9)


@dataclass(frozen=True)
class TrajectoryPoint:
    removed_fraction: float
    metrics: SnapshotMetrics


def ba_edges(n: int, m: int, seed: int) -> np.ndarray:
    """Edge array of a Barabasi-Albert graph grown from an (m+1)-clique.

    Each new node links to ``m`` distinct existing nodes picked with
    probability proportional to their current degree.
    """
    if m < 1 or n <= m:
        raise ValueError(f"need n > m >= 1, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i in range(m + 1) for j in range(i + 1, m + 1)]
    # every node appears once per incident edge end
    ends = [v for e in edges for v in e]
    for new in range(m + 1, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(ends[int(rng.integers(len(ends)))])
        for t in sorted(targets):
            edges.append((t, new))
            ends.extend((t, new))
    return np.array(edges, dtype=np.int64)


def generate_ba(n: int, m: int, seed: int) -> SnapshotGraph:
    return from_id_edges(n, ba_edges(n, m, seed))


def ba_edge_count(n: int, m: int) -> int:
    return m * (n - m - 1) + m * (m + 1) // 2


def _remaining_degrees(g: SnapshotGraph, removed: np.ndarray) -> np.ndarray:
    """Degrees in the graph with ``removed`` (boolean mask) nodes deleted."""
    src = np.repeat(np.arange(g.node_count), g.degrees())
    alive_edge = ~removed[src] & ~removed[g.indices]
    deg = np.bincount(src[alive_edge], minlength=g.node_count)
    deg[removed] = -1
    return deg


def _top_by_degree(deg: np.ndarray, alive: np.ndarray, count: int) -> list[int]:
    ids = np.flatnonzero(alive)
    # descending degree, ascending id on ties
    order = np.lexsort((ids, -deg[ids]))
    return ids[order[:count]].tolist()


def attack_step(g: SnapshotGraph, schedule: AttackSchedule,
                already_removed: set[int] | Sequence[int]) -> list[int]:
    """Nodes to delete next under ``schedule``, given what is already gone.

    The step size is ceil(step_fraction * n) of the original node count,
    capped by the number of surviving nodes.
    """
    n = g.node_count
    removed = np.zeros(n, dtype=bool)
    removed[list(already_removed)] = True
    alive = ~removed
    left = int(alive.sum())
    if left == 0:
        raise ValueError("no nodes left to remove")
    count = min(schedule.step_size(n), left)
    if schedule.strategy is Strategy.TARGETED_ADAPTIVE:
        return _top_by_degree(_remaining_degrees(g, removed), alive, count)
    if schedule.strategy is Strategy.TARGETED_STATIC:
        return _top_by_degree(g.degrees(), alive, count)
    rng = np.random.default_rng([schedule.seed, int(removed.sum())])
    picked = rng.choice(np.flatnonzero(alive), size=count, replace=False)
    return sorted(int(v) for v in picked)


MetricsFn = Callable[[SnapshotGraph], SnapshotMetrics]


def attack_trajectory(g: SnapshotGraph, schedule: AttackSchedule,
                      metrics_fn: MetricsFn = compute_metrics) -> list[TrajectoryPoint]:
    """Metrics of the unattacked graph followed by one point per removal step."""
    n = g.node_count
    removed: set[int] = set()
    points = [TrajectoryPoint(0.0, metrics_fn(g))]
    for _ in range(schedule.steps):
        if len(removed) >= n:
            break
        removed.update(attack_step(g, schedule, removed))
        keep = np.ones(n, dtype=bool)
        keep[list(removed)] = False
        points.append(TrajectoryPoint(len(removed) / n, metrics_fn(induced_subgraph(g, keep))))
    return points


def simulate_attack_curve(n: int, m: int, schedule: AttackSchedule,
                          sample_size: int | None = None, metrics_seed: int = 0,
                          dmax_variant: str = "max",
                          workers: int = 1) -> list[TrajectoryPoint]:
    """Attack a fresh BA(n, m) graph (seeded by ``schedule.seed``) and trace its metrics."""
    g = generate_ba(n, m, schedule.seed)

    def metrics_fn(h: SnapshotGraph) -> SnapshotMetrics:
        return compute_metrics(h, sample_size=sample_size, seed=metrics_seed,
                               dmax_variant=dmax_variant, workers=workers)

    return attack_trajectory(g, schedule, metrics_fn)


def rewire(edges: np.ndarray, fraction: float, rng: np.random.Generator) -> np.ndarray:
    """Degree-preserving double-edge swaps on ``fraction`` of the edges.

    Swaps that would create a self-loop or a duplicate edge are skipped, so
    the result stays a simple graph.
    """
    edges = edges.copy()
    swaps = max(1, int(round(fraction * len(edges) / 2)))
    present = {(min(u, v), max(u, v)) for u, v in edges.tolist()}
    for _ in range(swaps):
        for _attempt in range(20):
            i, j = rng.choice(len(edges), size=2, replace=False)
            a, b = edges[i]
            c, d = edges[j]
            if rng.random() < 0.5:
                c, d = d, c
            if len({a, b, c, d}) < 4:
                continue
            e1, e2 = (min(a, d), max(a, d)), (min(c, b), max(c, b))
            if e1 in present or e2 in present:
                continue
            present -= {(min(a, b), max(a, b)), (min(c, d), max(c, d))}
            present |= {e1, e2}
            edges[i] = (a, d)
            edges[j] = (c, b)
            break
    return edges


def _edge_array(g: SnapshotGraph) -> np.ndarray:
    src = np.repeat(np.arange(g.node_count), g.degrees())
    dst = g.indices.astype(np.int64)
    sel = src < dst
    return np.stack([src[sel], dst[sel]], axis=1)


def _remove_hubs(g: SnapshotGraph, fraction: float) -> SnapshotGraph:
    """Delete the top ``fraction`` of nodes by adaptively recomputed degree."""
    n = g.node_count
    target = math.ceil(fraction * n - 1e-9)
    schedule = AttackSchedule(Strategy.TARGETED_ADAPTIVE, 1.0 / n, 1.0)
    removed: set[int] = set()
    while len(removed) < target:
        removed.update(attack_step(g, schedule, removed))
    keep = np.ones(n, dtype=bool)
    keep[list(removed)] = False
    return induced_subgraph(g, keep)


def synthesize_labeled_stream(
    base: SnapshotGraph, ticks: int,
    anomaly_windows: Sequence[tuple[int, int, float]] = (),
    seed: int = 0, rewire_fraction: float = 0.005,
    metrics_fn: MetricsFn = compute_metrics,
) -> tuple[list[SnapshotMetrics], list[bool]]:
    """Labeled metrics stream built from perturbed copies of ``base``.

    Every tick starts from ``base`` with a seeded ``rewire_fraction`` of its
    edges swapped. Ticks inside an anomaly window ``[start, end)`` further
    lose ``fraction`` of their highest-degree nodes. Returns the per-tick
    metrics and ``True`` for anomalous ticks.
    """
    labels = [False] * ticks
    depth: dict[int, float] = {}
    for start, end, fraction in sorted(anomaly_windows):
        if not (0 <= start < end <= ticks):
            raise ValueError(f"window [{start}, {end}) outside [0, {ticks})")
        if not 0 < fraction < 1:
            raise ValueError("removal fraction must lie in (0, 1)")
        for t in range(start, end):
            if labels[t]:
                raise ValueError("anomaly windows overlap")
            labels[t] = True
            depth[t] = fraction
    base_edges = _edge_array(base)
    stream = []
    for t in range(ticks):
        rng = np.random.default_rng([seed, t])
        g = from_id_edges(base.node_count, rewire(base_edges, rewire_fraction, rng),
                          base.labels, bin_id=t)
        if labels[t]:
            g = _remove_hubs(g, depth[t])
        stream.append(metrics_fn(g))
    return stream, labels
