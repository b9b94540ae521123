"""Compact immutable undirected graphs and breadth-first search.

Nodes are dense integer ids assigned at build time; external labels (IP
strings, router names) live in a side table. Adjacency is stored in
compressed-row form so that a snapshot can be shared read-only between
worker threads.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Hashable, Iterable, Iterator, Sequence

import numpy as np
import scipy.sparse as sp

UNREACHABLE = -1


@dataclass(frozen=True, eq=False)
class SnapshotGraph:
    """Undirected simple graph for one time bin.

    ``indptr``/``indices`` form a CSR adjacency with sorted neighbor runs.
    ``labels[i]`` is the external label of node ``i``.
    """

    indptr: np.ndarray
    indices: np.ndarray
    labels: tuple = ()
    bin_id: int = 0
    _label_index: dict | None = field(default=None, init=False, repr=False, compare=False)

    @property
    def node_count(self) -> int:
        return len(self.indptr) - 1

    @property
    def edge_count(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def node_id(self, label: Hashable) -> int:
        if self._label_index is None:
            object.__setattr__(
                self, "_label_index", {lab: i for i, lab in enumerate(self.labels)}
            )
        return self._label_index[label]

    def edges(self) -> Iterator[tuple[int, int]]:
        """Yield each undirected edge once as ``(u, v)`` with ``u < v``."""
        for u in range(self.node_count):
            for v in self.neighbors(u):
                if u < v:
                    yield u, int(v)

    def label_edges(self) -> list[tuple]:
        return [(self.labels[u], self.labels[v]) for u, v in self.edges()]

    @cached_property
    def adjacency_matrix(self) -> sp.csr_matrix:
        n = self.node_count
        data = np.ones(len(self.indices), dtype=np.float32)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(n, n))

    def with_bin(self, bin_id: int) -> "SnapshotGraph":
        return SnapshotGraph(self.indptr, self.indices, self.labels, bin_id)

    def __repr__(self) -> str:
        return (
            f"SnapshotGraph(bin_id={self.bin_id}, nodes={self.node_count}, "
            f"edges={self.edge_count})"
        )


def _from_id_pairs(
    us: np.ndarray, vs: np.ndarray, n: int, labels: tuple, bin_id: int
) -> SnapshotGraph:
    """Build CSR from integer endpoint arrays; drops self-loops and duplicates."""
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    keep = us != vs
    us, vs = us[keep], vs[keep]
    lo = np.minimum(us, vs)
    hi = np.maximum(us, vs)
    if len(lo):
        key = np.unique(lo * n + hi)
        lo, hi = key // n, key % n
    src = np.concatenate([lo, hi])
    dst = np.concatenate([hi, lo])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return SnapshotGraph(indptr, dst.astype(np.int32), labels, bin_id)


def build_graph(edges: Iterable[tuple[Hashable, Hashable]], bin_id: int = 0) -> SnapshotGraph:
    """Build a simple undirected graph from label pairs.

    Duplicate edges, reversed duplicates and self-loops are dropped. Node ids
    follow order of first appearance in ``edges``; a self-loop still
    introduces its node.
    """
    index: dict = {}
    us: list[int] = []
    vs: list[int] = []
    for a, b in edges:
        ia = index.setdefault(a, len(index))
        ib = index.setdefault(b, len(index))
        us.append(ia)
        vs.append(ib)
    labels = tuple(index)
    return _from_id_pairs(np.array(us, dtype=np.int64), np.array(vs, dtype=np.int64),
                          len(labels), labels, bin_id)


def from_id_edges(
    n: int, edges: Sequence[tuple[int, int]] | np.ndarray, labels: tuple | None = None,
    bin_id: int = 0,
) -> SnapshotGraph:
    """Build a graph on nodes ``0..n-1`` from integer pairs (labels default to ids)."""
    arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if len(arr) and (arr.min() < 0 or arr.max() >= n):
        raise ValueError("edge endpoint out of range")
    if labels is None:
        labels = tuple(range(n))
    return _from_id_pairs(arr[:, 0], arr[:, 1], n, labels, bin_id)


def _check_node(g: SnapshotGraph, v: int) -> None:
    if not 0 <= v < g.node_count:
        raise IndexError(f"node id {v} out of range for graph with {g.node_count} nodes")


def bfs_distances(g: SnapshotGraph, source: int) -> np.ndarray:
    """Hop distances from ``source``; unreachable nodes hold ``UNREACHABLE``."""
    _check_node(g, source)
    indptr = g.indptr.tolist()
    indices = g.indices.tolist()
    dist = [UNREACHABLE] * g.node_count
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for v in indices[indptr[u]:indptr[u + 1]]:
            if dist[v] == UNREACHABLE:
                dist[v] = du
                queue.append(v)
    return np.array(dist, dtype=np.int32)


def multi_source_distances(g: SnapshotGraph, sources: Sequence[int]) -> np.ndarray:
    """Distance rows for a batch of sources, shape ``(len(sources), n)``.

    Runs one level-synchronous BFS for the whole batch: each level expands
    every frontier with a single sparse-dense product.
    """
    n = g.node_count
    src = np.asarray(sources, dtype=np.int64)
    b = len(src)
    dist = np.full((b, n), UNREACHABLE, dtype=np.int32)
    if b == 0:
        return dist
    if src.min() < 0 or src.max() >= n:
        raise IndexError("source id out of range")
    cols = np.arange(b)
    frontier = np.zeros((n, b), dtype=np.float32)
    frontier[src, cols] = 1.0
    visited = frontier > 0
    dist[cols, src] = 0
    a = g.adjacency_matrix
    level = 0
    while True:
        level += 1
        reached = (a @ frontier) > 0
        reached &= ~visited
        if not reached.any():
            break
        visited |= reached
        dist.T[reached] = level
        frontier = reached.astype(np.float32)
    return dist


def level_counts(g: SnapshotGraph, sources: Sequence[int]) -> np.ndarray:
    """Number of nodes at each hop distance from each source.

    Returns ``counts`` of shape ``(levels, len(sources))`` where
    ``counts[h, j]`` nodes sit exactly ``h`` hops from ``sources[j]``. Same
    batched BFS as :func:`multi_source_distances` without materializing
    the distance rows.
    """
    n = g.node_count
    src = np.asarray(sources, dtype=np.int64)
    b = len(src)
    if b and (src.min() < 0 or src.max() >= n):
        raise IndexError("source id out of range")
    frontier = np.zeros((n, b), dtype=np.float32)
    frontier[src, np.arange(b)] = 1.0
    visited = frontier > 0
    rows = [np.ones(b, dtype=np.int64)]
    a = g.adjacency_matrix
    while True:
        reached = (a @ frontier) > 0
        reached &= ~visited
        cnt = reached.sum(axis=0)
        if not cnt.any():
            break
        rows.append(cnt)
        visited |= reached
        frontier = reached.astype(np.float32)
    return np.vstack(rows)


def component_labels(g: SnapshotGraph) -> np.ndarray:
    """Component index per node, numbered in order of smallest member id."""
    n = g.node_count
    comp = [-1] * n
    indptr, indices = g.indptr.tolist(), g.indices.tolist()
    c = 0
    for s in range(n):
        if comp[s] >= 0:
            continue
        comp[s] = c
        stack = [s]
        while stack:
            u = stack.pop()
            for v in indices[indptr[u]:indptr[u + 1]]:
                if comp[v] < 0:
                    comp[v] = c
                    stack.append(v)
        c += 1
    return np.array(comp, dtype=np.int64)


def induced_subgraph(g: SnapshotGraph, keep: np.ndarray) -> SnapshotGraph:
    """Subgraph induced by the boolean mask ``keep``; ids are renumbered in order."""
    keep = np.asarray(keep, dtype=bool)
    new_id = np.cumsum(keep) - 1
    n_new = int(keep.sum())
    src = np.repeat(np.arange(g.node_count), g.degrees())
    dst = g.indices.astype(np.int64)
    sel = keep[src] & keep[dst] & (src < dst)
    labels = tuple(lab for lab, k in zip(g.labels, keep) if k)
    return _from_id_pairs(new_id[src[sel]], new_id[dst[sel]], n_new, labels, g.bin_id)


def largest_component(g: SnapshotGraph) -> SnapshotGraph:
    """Induced subgraph on the largest connected component.

    Ties go to the component holding the smallest node id. Returns ``g``
    itself when it is already connected.
    """
    if g.node_count == 0:
        return g
    comp = component_labels(g)
    sizes = np.bincount(comp)
    if len(sizes) == 1:
        return g
    # argmax returns the first maximum; components are numbered by smallest id
    best = int(np.argmax(sizes))
    return induced_subgraph(g, comp == best)


def is_connected(g: SnapshotGraph) -> bool:
    if g.node_count == 0:
        return True
    return bool((bfs_distances(g, 0) != UNREACHABLE).all())


def read_edge_list(path: str | Path, bin_id: int = 0) -> SnapshotGraph:
    """Read whitespace-separated label pairs, one edge per line; '#' lines skipped."""
    edges = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected two labels, got {len(parts)}")
            edges.append((parts[0], parts[1]))
    return build_graph(edges, bin_id=bin_id)


def write_edge_list(g: SnapshotGraph, path: str | Path, header: Iterable[str] = ()) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        for a, b in g.label_edges():
            fh.write(f"{a} {b}\n")
