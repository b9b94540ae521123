"""Test graph families and brute-force oracles."""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from topoanomaly.graph import from_id_edges


def path_graph(n):
    return from_id_edges(n, [(i, i + 1) for i in range(n - 1)])


def star_graph(leaves):
    return from_id_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def cycle_graph(n):
    return from_id_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n):
    return from_id_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def random_connected_graph(rng: np.random.Generator, n: int, extra: float):
    """Random spanning tree plus ``extra * n`` random chords."""
    perm = rng.permutation(n)
    edges = [(int(perm[i]), int(perm[rng.integers(i)])) for i in range(1, n)]
    for _ in range(int(extra * n)):
        u, v = rng.integers(n, size=2)
        edges.append((int(u), int(v)))
    return from_id_edges(n, edges)


def floyd_warshall(g) -> np.ndarray:
    """All-pairs hop distances by dynamic programming; inf where unreachable."""
    n = g.node_count
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0)
    for u, v in g.edges():
        d[u, v] = d[v, u] = 1
    for k in range(n):
        d = np.minimum(d, d[:, k:k + 1] + d[k:k + 1, :])
    return d


def oracle_metrics(d: np.ndarray, variant: str = "max"):
    """(D_max, D_eff, SP) straight from the definitions on a distance matrix."""
    n = len(d)
    ecc = d.max(axis=1)
    d_max = float(ecc.max()) if variant == "max" else float(Fraction(int(ecc.sum()), n))
    iu = np.triu_indices(n, 1)
    pairs = sorted(d[iu].tolist())
    rank = math.ceil(Fraction(9, 10) * len(pairs))
    d_eff = pairs[rank - 1]
    # mean over nodes of the mean distance to the n - 1 others, as an exact ratio
    sp = float(sum(Fraction(int(d[v].sum()), n - 1) for v in range(n)) / n)
    return d_max, d_eff, sp
