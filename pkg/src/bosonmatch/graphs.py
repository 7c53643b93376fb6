"""Graphs, matchings, and the two constructions the samplers run on.

Vertices are dense integer indices.  Edges are canonical ``(u, v)`` tuples
with ``u < v``; an absent edge has weight 0, a stored edge has a strictly
positive weight.  Labels such as "first copy of vertex 3" or "copy t of
row j" are derived views, never storage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, NotPerfect

__all__ = [
    "Edge",
    "Graph",
    "Matching",
    "ProductGraph",
    "BipartiteGadget",
    "COPY1",
    "COPY2",
    "LINK",
    "cartesian_product_k2",
    "bs_gadget",
    "project_to_subset",
    "extract_occupancy",
    "complete_graph",
    "cycle_graph",
    "path_graph",
    "star_graph",
    "empty_graph",
]

Edge = tuple[int, int]

# Edge classes of the two-copy product graph: the two isomorphic copies of
# the base graph, and the rung edges joining each vertex to its copy.
COPY1 = "copy1"
COPY2 = "copy2"
LINK = "link"


def _canonical_edge(u: int, v: int) -> Edge:
    if u == v:
        raise ValueError(f"self-loop at vertex {u}")
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph with positive edge weights.

    Parameters
    ----------
    vertex_count : int
        Number of vertices; indices run over ``range(vertex_count)``.
    weights : dict[Edge, float]
        Map from canonical edge to weight.  Every stored weight must be
        strictly positive; duplicates (same pair given twice, in either
        order) are rejected rather than merged.
    """

    vertex_count: int
    weights: dict[Edge, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.vertex_count < 0:
            raise ValueError("vertex_count must be non-negative")
        canon: dict[Edge, float] = {}
        for (u, v), w in self.weights.items():
            e = _canonical_edge(u, v)
            if not (0 <= e[0] and e[1] < self.vertex_count):
                raise ValueError(f"edge {e} outside vertex range [0, {self.vertex_count})")
            if e in canon:
                raise ValueError(f"duplicate edge {e}")
            if not w > 0:
                raise ValueError(f"edge {e} has non-positive weight {w}")
            canon[e] = float(w)
        object.__setattr__(self, "weights", canon)
        object.__setattr__(self, "_edge_list", tuple(sorted(canon)))

    @property
    def edges(self) -> tuple[Edge, ...]:
        """Edges in sorted canonical order."""
        return self._edge_list  # type: ignore[attr-defined]

    @property
    def edge_count(self) -> int:
        return len(self.weights)

    def weight(self, u: int, v: int) -> float:
        """Weight of edge (u, v), or 0.0 if absent."""
        return self.weights.get(_canonical_edge(u, v), 0.0)

    def has_edge(self, u: int, v: int) -> bool:
        return _canonical_edge(u, v) in self.weights

    def neighbors(self, u: int) -> list[int]:
        out = []
        for a, b in self.edges:
            if a == u:
                out.append(b)
            elif b == u:
                out.append(a)
        return out

    def adjacency_matrix(self) -> np.ndarray:
        """Weighted adjacency matrix as float64."""
        a = np.zeros((self.vertex_count, self.vertex_count))
        for (u, v), w in self.weights.items():
            a[u, v] = w
            a[v, u] = w
        return a

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(endpoint_u, endpoint_v, weight) arrays in sorted edge order."""
        es = self.edges
        eu = np.fromiter((e[0] for e in es), np.int64, len(es))
        ev = np.fromiter((e[1] for e in es), np.int64, len(es))
        w = np.fromiter((self.weights[e] for e in es), np.float64, len(es))
        return eu, ev, w

    def max_weight(self) -> float:
        return max(self.weights.values(), default=0.0)


class Matching:
    """A set of vertex-disjoint edges of a parent graph.

    The only mutable type in the package: a chain that owns a matching
    exclusively may add, remove, and slide edges in place.
    """

    __slots__ = ("graph", "_partner", "_size")

    def __init__(self, graph: Graph, edges: "frozenset[Edge] | set[Edge] | tuple[Edge, ...]" = ()):
        self.graph = graph
        self._partner = [-1] * graph.vertex_count
        self._size = 0
        for u, v in edges:
            self.add(u, v)

    def add(self, u: int, v: int) -> None:
        e = _canonical_edge(u, v)
        if e not in self.graph.weights:
            raise ValueError(f"edge {e} not in parent graph")
        if self._partner[e[0]] != -1 or self._partner[e[1]] != -1:
            raise ValueError(f"edge {e} shares an endpoint with the matching")
        self._partner[e[0]] = e[1]
        self._partner[e[1]] = e[0]
        self._size += 1

    def remove(self, u: int, v: int) -> None:
        e = _canonical_edge(u, v)
        if self._partner[e[0]] != e[1]:
            raise ValueError(f"edge {e} not in matching")
        self._partner[e[0]] = -1
        self._partner[e[1]] = -1
        self._size -= 1

    def partner(self, u: int) -> int:
        """Vertex matched to u, or -1."""
        return self._partner[u]

    @property
    def size(self) -> int:
        return self._size

    @property
    def edges(self) -> frozenset[Edge]:
        return frozenset(
            (u, v) for u, v in enumerate(self._partner) if v > u
        )

    def unmatched_vertices(self) -> list[int]:
        return [u for u, p in enumerate(self._partner) if p == -1]

    def is_perfect(self) -> bool:
        return 2 * self._size == self.graph.vertex_count

    def is_near_perfect(self) -> bool:
        return 2 * self._size == self.graph.vertex_count - 2

    def weight(self) -> float:
        """Product of edge weights (1.0 for the empty matching)."""
        w = 1.0
        for e in self.edges:
            w *= self.graph.weights[e]
        return w

    def copy(self) -> "Matching":
        m = Matching(self.graph)
        m._partner = list(self._partner)
        m._size = self._size
        return m

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Matching)
            and other.graph is self.graph
            and other._partner == self._partner
        )

    def __hash__(self) -> int:
        return hash(self.edges)

    def __repr__(self) -> str:
        return f"Matching({sorted(self.edges)})"


@dataclass(frozen=True)
class ProductGraph:
    """Two copies of a base graph joined by a perfect matching of link edges.

    Vertex layout: original vertex ``v`` keeps index ``v`` in the first copy
    and gets index ``v + n`` in the second copy.
    """

    graph: Graph
    base: Graph
    scale: float
    edge_class: dict[Edge, str]

    @property
    def base_vertex_count(self) -> int:
        return self.base.vertex_count

    def origin(self, vertex: int) -> tuple[int, int]:
        """(original vertex, copy index in {1, 2}) for a product vertex."""
        n = self.base.vertex_count
        return (vertex, 1) if vertex < n else (vertex - n, 2)

    def class_edges(self, cls: str) -> list[Edge]:
        return [e for e, c in self.edge_class.items() if c == cls]


@dataclass(frozen=True)
class BipartiteGadget:
    """Bipartite graph encoding occupancy patterns of a non-negative matrix.

    For an m-row, n-column matrix and ``k`` copies per row the layout is::

        column vertices, first copy:   0 .. n-1
        row-copy vertices, first copy: n + j*k + t           (j rows, t copies)
        row-copy vertices, second:     n + m*k + j*k + t
        column vertices, second copy:  n + 2*m*k + i

    The bipartition puts first-copy columns with second-copy row vertices on
    one side; every edge crosses sides.
    """

    graph: Graph
    matrix: np.ndarray
    k: int

    @property
    def rows(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def cols(self) -> int:
        return int(self.matrix.shape[1])

    @property
    def part_size(self) -> int:
        return self.cols + self.rows * self.k

    def column_vertex(self, i: int, copy: int) -> int:
        n, m, k = self.cols, self.rows, self.k
        return i if copy == 1 else n + 2 * m * k + i

    def row_vertex(self, j: int, t: int, copy: int) -> int:
        n, m, k = self.cols, self.rows, self.k
        return n + j * k + t if copy == 1 else n + m * k + j * k + t

    def label(self, vertex: int) -> tuple:
        """Human-readable label ('col', i, copy) or ('row', j, t, copy)."""
        n, m, k = self.cols, self.rows, self.k
        if vertex < n:
            return ("col", vertex, 1)
        if vertex < n + m * k:
            r = vertex - n
            return ("row", r // k, r % k, 1)
        if vertex < n + 2 * m * k:
            r = vertex - n - m * k
            return ("row", r // k, r % k, 2)
        return ("col", vertex - n - 2 * m * k, 2)

    def side(self, vertex: int) -> str:
        """'left' for first-copy columns and second-copy row vertices."""
        lbl = self.label(vertex)
        if lbl[0] == "col":
            return "left" if lbl[2] == 1 else "right"
        return "left" if lbl[3] == 2 else "right"

    def left_vertices(self) -> list[int]:
        return [v for v in range(self.graph.vertex_count) if self.side(v) == "left"]

    def right_vertices(self) -> list[int]:
        return [v for v in range(self.graph.vertex_count) if self.side(v) == "right"]

    def edge_class_of(self, u: int, v: int) -> str:
        """'cols1', 'cols2', or 'rung' for an edge of the gadget."""
        a, b = self.label(u), self.label(v)
        kinds = {a[0], b[0]}
        if kinds == {"col", "row"}:
            copy = a[2] if a[0] == "col" else b[2]
            return "cols1" if copy == 1 else "cols2"
        return "rung"


def cartesian_product_k2(g: Graph, c: float) -> ProductGraph:
    """Join two weighted copies of ``g``, scaling copy edges by ``c**2``.

    Copy edges keep the base weight times ``c**2``; each vertex is linked to
    its twin by a unit-weight edge.
    """
    if not c > 0:
        raise ValueError(f"scale must be positive, got {c}")
    n = g.vertex_count
    weights: dict[Edge, float] = {}
    classes: dict[Edge, str] = {}
    c2 = c * c
    for (u, v), w in g.weights.items():
        weights[(u, v)] = c2 * w
        classes[(u, v)] = COPY1
        weights[(u + n, v + n)] = c2 * w
        classes[(u + n, v + n)] = COPY2
    for v in range(n):
        weights[(v, v + n)] = 1.0
        classes[(v, v + n)] = LINK
    return ProductGraph(graph=Graph(2 * n, weights), base=g, scale=c, edge_class=classes)


def bs_gadget(a: np.ndarray, k: int) -> BipartiteGadget:
    """Build the k-copy bipartite gadget for a non-negative matrix.

    Entry ``a[j, i]`` weights the edges between column vertex ``i`` and every
    copy ``t`` of row vertex ``j``, in both halves; rung edges of weight 1
    join the two copies of each row vertex.  Requires ``n <= m*k`` so that a
    perfect matching can exist.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError("matrix must be 2-D")
    if np.any(a < 0):
        raise ValueError("matrix entries must be non-negative")
    m, n = a.shape
    if m < 1 or n < 1:
        raise ValueError("matrix must be non-empty")
    if k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    if n > m * k:
        raise DimensionError(f"need n <= m*k, got n={n}, m={m}, k={k}")
    gadget = BipartiteGadget(graph=Graph(0), matrix=a, k=k)  # layout helper only
    weights: dict[Edge, float] = {}
    for j in range(m):
        for t in range(k):
            for copy in (1, 2):
                rv = gadget.row_vertex(j, t, copy)
                for i in range(n):
                    if a[j, i] != 0:
                        cv = gadget.column_vertex(i, copy)
                        weights[_canonical_edge(cv, rv)] = float(a[j, i])
            weights[_canonical_edge(gadget.row_vertex(j, t, 1), gadget.row_vertex(j, t, 2))] = 1.0
    graph = Graph(2 * n + 2 * m * k, weights)
    return BipartiteGadget(graph=graph, matrix=a, k=k)


def project_to_subset(pm: Matching, pg: ProductGraph) -> frozenset[int]:
    """Original vertices covered by first-copy edges of a perfect matching."""
    if pm.graph is not pg.graph:
        raise ValueError("matching does not belong to the product graph")
    if not pm.is_perfect():
        raise NotPerfect(f"{len(pm.unmatched_vertices())} vertices unmatched")
    subset = set()
    for e in pm.edges:
        if pg.edge_class[e] == COPY1:
            subset.add(e[0])
            subset.add(e[1])
    return frozenset(subset)


def extract_occupancy(pm: Matching, gadget: BipartiteGadget) -> tuple[int, ...]:
    """Per-row counts of first-copy row vertices matched into column vertices."""
    if pm.graph is not gadget.graph:
        raise ValueError("matching does not belong to the gadget")
    if not pm.is_perfect():
        raise NotPerfect(f"{len(pm.unmatched_vertices())} vertices unmatched")
    n, m, k = gadget.cols, gadget.rows, gadget.k
    z = [0] * m
    for j in range(m):
        for t in range(k):
            rv = gadget.row_vertex(j, t, 1)
            p = pm.partner(rv)
            if 0 <= p < n:
                z[j] += 1
    total = sum(z)
    if total != n:
        raise AssertionError(f"occupancy sums to {total}, expected {n}")
    return tuple(z)


def complete_graph(n: int, weight: float = 1.0) -> Graph:
    return Graph(n, {(u, v): weight for u in range(n) for v in range(u + 1, n)})


def cycle_graph(n: int, weight: float = 1.0) -> Graph:
    if n < 3:
        raise ValueError("cycle needs at least 3 vertices")
    return Graph(n, {_canonical_edge(i, (i + 1) % n): weight for i in range(n)})


def path_graph(n: int, weight: float = 1.0) -> Graph:
    return Graph(n, {(i, i + 1): weight for i in range(n - 1)})


def star_graph(leaves: int, weight: float = 1.0) -> Graph:
    return Graph(leaves + 1, {(0, i): weight for i in range(1, leaves + 1)})


def empty_graph(n: int) -> Graph:
    return Graph(n, {})


def complete_bipartite_biadjacency(p: int, q: int) -> np.ndarray:
    return np.ones((p, q))


def bipartite_graph(biadjacency: np.ndarray) -> Graph:
    """Graph with left vertices 0..p-1 and right vertices p..p+q-1."""
    b = np.asarray(biadjacency, dtype=float)
    p, q = b.shape
    weights = {
        (i, p + j): float(b[i, j]) for i in range(p) for j in range(q) if b[i, j] != 0
    }
    return Graph(p + q, weights)


def bipartition_of(g: Graph) -> "tuple[list[int], list[int]] | None":
    """Two-color ``g`` if possible, else None.  Isolated vertices go left."""
    color = [-1] * g.vertex_count
    adj: list[list[int]] = [[] for _ in range(g.vertex_count)]
    for u, v in g.edges:
        adj[u].append(v)
        adj[v].append(u)
    for s in range(g.vertex_count):
        if color[s] != -1:
            continue
        color[s] = 0
        stack = [s]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if color[v] == -1:
                    color[v] = 1 - color[u]
                    stack.append(v)
                elif color[v] == color[u]:
                    return None
    left = [v for v in range(g.vertex_count) if color[v] == 0]
    right = [v for v in range(g.vertex_count) if color[v] == 1]
    return left, right
