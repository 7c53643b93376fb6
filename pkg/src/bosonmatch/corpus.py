"""Deterministic test corpora: graphs, matrices, bipartite instances.

The graph corpus enumerates one canonical representative per isomorphism
class of connected graphs up to a vertex cap, by minimizing the edge
bitmask over all vertex relabelings (vectorized over every mask at once).
Everything here is generated, never sampled, so runs are reproducible
without fixtures.
"""

from __future__ import annotations

import itertools

import numpy as np

from .graphs import Graph, bipartite_graph

__all__ = [
    "connected_graphs",
    "matrix_corpus",
    "bipartite_corpus",
    "hafnian_extras",
    "random_graph",
]


def _edge_bits(n: int) -> dict[tuple[int, int], int]:
    return {e: i for i, e in enumerate(itertools.combinations(range(n), 2))}


def _canonical_masks(n: int) -> np.ndarray:
    """canonical[mask] = lexicographically smallest isomorphic edge mask."""
    bits = _edge_bits(n)
    n_bits = len(bits)
    masks = np.arange(1 << n_bits, dtype=np.int64)
    canonical = masks.copy()
    for perm in itertools.permutations(range(n)):
        remapped = np.zeros_like(masks)
        for (u, v), src in bits.items():
            dst = bits[tuple(sorted((perm[u], perm[v])))]
            remapped |= ((masks >> src) & 1) << dst
        np.minimum(canonical, remapped, out=canonical)
    return canonical


def _is_connected_mask(n: int, mask: int, bits: dict[tuple[int, int], int]) -> bool:
    adj: list[list[int]] = [[] for _ in range(n)]
    for (u, v), i in bits.items():
        if mask >> i & 1:
            adj[u].append(v)
            adj[v].append(u)
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == n


def connected_graphs(max_n: int) -> list[tuple[str, Graph]]:
    """One representative per isomorphism class of connected graphs,
    for every vertex count from 1 to ``max_n`` (capped at 6)."""
    if not 1 <= max_n <= 6:
        raise ValueError("connected-graph corpus supports 1 <= max_n <= 6")
    out: list[tuple[str, Graph]] = [("n1-g0", Graph(1, {}))]
    for n in range(2, max_n + 1):
        bits = _edge_bits(n)
        reps = np.unique(_canonical_masks(n))
        edges_of = {i: e for e, i in bits.items()}
        idx = 0
        for mask in reps.tolist():
            if not _is_connected_mask(n, mask, bits):
                continue
            weights = {edges_of[i]: 1.0 for i in range(len(bits)) if mask >> i & 1}
            out.append((f"n{n}-g{idx}", Graph(n, weights)))
            idx += 1
    return out


def _fix_zero_columns(a: np.ndarray) -> np.ndarray:
    for i in range(a.shape[1]):
        if not a[:, i].any():
            a[0, i] = 1
    return a


def matrix_corpus() -> list[tuple[str, np.ndarray]]:
    """Fixed grid of non-negative integer matrices with entries in {0,1,2}.

    Shapes cover n <= m <= 4 with n <= 3; per shape: all-ones, a cyclic
    ramp of 0/1/2 entries (patched to avoid zero columns), a banded
    diagonal-heavy pattern, and for taller shapes an all-ones matrix with a
    zero row (zero rows are legal, zero columns are not).
    """
    shapes = [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2), (3, 3), (4, 2), (4, 3)]
    out: list[tuple[str, np.ndarray]] = []
    for m, n in shapes:
        out.append((f"ones-{m}x{n}", np.ones((m, n))))
        ramp = np.fromfunction(lambda j, i: (i + 2 * j) % 3, (m, n))
        out.append((f"ramp-{m}x{n}", _fix_zero_columns(ramp.astype(float))))
        band = np.zeros((m, n))
        for j in range(m):
            for i in range(n):
                if j == i:
                    band[j, i] = 2
                elif j == i + 1:
                    band[j, i] = 1
        out.append((f"band-{m}x{n}", _fix_zero_columns(band)))
        if m > n:
            zr = np.ones((m, n))
            zr[-1, :] = 0
            out.append((f"zerorow-{m}x{n}", zr))
    return out


def bipartite_corpus() -> list[tuple[str, Graph]]:
    """Small balanced bipartite graphs (<= 8 vertices) for chain checks."""
    items = [
        ("k11", [[1.0]]),
        ("p4", [[1.0, 0.0], [1.0, 1.0]]),
        ("k22", [[1.0, 1.0], [1.0, 1.0]]),
        ("k22-weighted", [[2.0, 1.0], [1.0, 2.0]]),
        ("c6", [[1.0, 1.0, 0.0], [0.0, 1.0, 1.0], [1.0, 0.0, 1.0]]),
        ("k33", [[1.0] * 3] * 3),
        ("eye3", [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
        ("band3", [[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]]),
        ("k44", [[1.0] * 4] * 4),
    ]
    return [(name, bipartite_graph(np.array(b))) for name, b in items]


def hafnian_extras() -> list[tuple[str, Graph]]:
    """Deterministic graphs on 7-10 vertices for hafnian cross-checks."""
    from .graphs import complete_graph, cycle_graph

    petersen_edges = [
        (0, 1), (1, 2), (2, 3), (3, 4), (4, 0),
        (5, 7), (7, 9), (9, 6), (6, 8), (8, 5),
        (0, 5), (1, 6), (2, 7), (3, 8), (4, 9),
    ]
    return [
        ("c7", cycle_graph(7)),
        ("c8", cycle_graph(8)),
        ("c10", cycle_graph(10)),
        ("k7", complete_graph(7)),
        ("k8", complete_graph(8)),
        ("k44-graph", bipartite_graph(np.ones((4, 4)))),
        ("petersen", Graph(10, {e: 1.0 for e in petersen_edges})),
    ]


def random_graph(n: int, edge_prob: float, seed: int, weight_choices=(1.0,)) -> Graph:
    """Seeded Erdos-Renyi-style graph for benchmarks."""
    rng = np.random.default_rng(seed)
    weights = {}
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < edge_prob:
                weights[(u, v)] = float(rng.choice(weight_choices))
    return Graph(n, weights)
