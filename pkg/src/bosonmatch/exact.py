"""Brute-force ground truth: permanents, hafnians, matching enumeration,
partition profiles, exact target distributions, and total-variation distance.

Everything here is deliberately small-scale and exact.  All-integer inputs
are computed in exact integer arithmetic; weighted inputs are promoted to
`fractions.Fraction` (exact for every float), so inequality checks never
fail to rounding.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import NotSymmetric, SizeLimit, ZeroNormalizer
from .graphs import BipartiteGadget, Edge, Graph, Matching, extract_occupancy

__all__ = [
    "RYSER_CAP",
    "NAIVE_CAP",
    "HAFNIAN_CAP",
    "MATCHING_ENUM_CAP",
    "GBS_ENUM_CAP",
    "PHI_CAP",
    "DistributionTable",
    "PartitionProfile",
    "permanent",
    "hafnian",
    "enumerate_matchings",
    "enumerate_perfect_matchings",
    "matching_count_profile",
    "partition_profile",
    "occupancy_patterns",
    "exact_gbs_distribution",
    "exact_bs_distribution",
    "exact_gadget_distribution",
    "exact_pm_distribution",
    "tv_distance",
]

RYSER_CAP = 20
NAIVE_CAP = 8
HAFNIAN_CAP = 16
MATCHING_ENUM_CAP = 16
GBS_ENUM_CAP = 12
PHI_CAP = 100_000


# ----------------------------------------------------------------------
# Distribution tables
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class DistributionTable:
    """Exact finite probability table keyed by canonical outcome tuples.

    Keys are sorted vertex tuples (subset outcomes) or fixed-length
    occupancy tuples.  Probabilities must be non-negative and sum to 1
    within 1e-12; ``normalizer`` records the total pre-normalization weight
    when the producer knows it.
    """

    entries: dict[tuple, float]
    normalizer: float = field(default=float("nan"), compare=False)

    def __post_init__(self) -> None:
        total = 0.0
        for key, p in self.entries.items():
            if not isinstance(key, tuple):
                raise ValueError(f"outcome key {key!r} is not a tuple")
            if p < 0:
                raise ValueError(f"negative probability {p} for {key}")
            total += p
        if self.entries and abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total}, expected 1")

    def p(self, key: tuple) -> float:
        return self.entries.get(key, 0.0)

    def support(self) -> list[tuple]:
        return sorted(self.entries)

    def items(self):
        return self.entries.items()

    def __len__(self) -> int:
        return len(self.entries)


def tv_distance(p: "DistributionTable | dict", q: "DistributionTable | dict") -> float:
    """Half the l1 distance between two probability tables.

    Missing keys read as probability 0, so tables with different supports
    compare correctly.
    """
    pe = p.entries if isinstance(p, DistributionTable) else p
    qe = q.entries if isinstance(q, DistributionTable) else q
    keys = set(pe) | set(qe)
    return 0.5 * sum(abs(pe.get(k, 0.0) - qe.get(k, 0.0)) for k in keys)


def _normalized_table(weights: dict[tuple, Fraction]) -> DistributionTable:
    total = sum(weights.values())
    if total <= 0:
        raise ZeroNormalizer("every outcome has weight zero")
    entries = {k: float(w / total) for k, w in weights.items() if w > 0}
    return DistributionTable(entries=entries, normalizer=float(total))


# ----------------------------------------------------------------------
# Permanent
# ----------------------------------------------------------------------

def _as_square_rows(a) -> list[list]:
    arr = np.asarray(a)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"matrix must be square, got shape {arr.shape}")
    return arr.tolist()


def _is_integral(rows: list[list]) -> bool:
    return all(float(x).is_integer() for row in rows for x in row)


def _permanent_ryser(rows: list[list]):
    """Gray-code Ryser evaluation; exact when entries are exact types."""
    n = len(rows)
    if n == 0:
        return 1
    cols = list(zip(*rows))
    rowsums = [0] * n
    total = 0
    gray = 0
    sign = 1 if n % 2 == 0 else -1
    for counter in range(1, 1 << n):
        new_gray = counter ^ (counter >> 1)
        bit = gray ^ new_gray
        j = bit.bit_length() - 1
        if new_gray & bit:
            for i in range(n):
                rowsums[i] += cols[j][i]
        else:
            for i in range(n):
                rowsums[i] -= cols[j][i]
        gray = new_gray
        prod = 1
        for s in rowsums:
            prod *= s
        total += prod if (new_gray.bit_count() % 2 == 0) else -prod
    return sign * total


def _permanent_naive(rows: list[list]):
    n = len(rows)
    if n == 0:
        return 1
    total = 0
    for perm in itertools.permutations(range(n)):
        prod = 1
        for i, j in enumerate(perm):
            prod *= rows[i][j]
        total += prod
    return total


def permanent(a, method: str = "ryser"):
    """Permanent of a square matrix.

    Uses Gray-code Ryser by default (n <= 20); ``method="naive"`` expands
    over all permutations as an independent cross-check (n <= 8).  Returns
    an exact int for all-integer input, float otherwise.
    """
    rows = _as_square_rows(a)
    n = len(rows)
    if method == "ryser":
        if n > RYSER_CAP:
            raise SizeLimit(f"permanent limited to {RYSER_CAP}x{RYSER_CAP}, got {n}")
        fn = _permanent_ryser
    elif method == "naive":
        if n > NAIVE_CAP:
            raise SizeLimit(f"naive permanent limited to {NAIVE_CAP}x{NAIVE_CAP}, got {n}")
        fn = _permanent_naive
    else:
        raise ValueError(f"unknown method {method!r}")
    if _is_integral(rows):
        return fn([[int(x) for x in row] for row in rows])
    return float(fn(rows))


def permanent_minor(rows: list[list], drop_row: int, drop_col: int):
    """Exact permanent of the matrix with one row and one column removed."""
    sub = [
        [x for j, x in enumerate(row) if j != drop_col]
        for i, row in enumerate(rows)
        if i != drop_row
    ]
    return _permanent_ryser(sub)


# ----------------------------------------------------------------------
# Hafnian
# ----------------------------------------------------------------------

def _hafnian_rec(rows: list[list], idx: list[int]):
    # Pair the first remaining index with each later one and recurse.
    if not idx:
        return 1
    i0 = idx[0]
    rest = idx[1:]
    total = 0
    for pos, j in enumerate(rest):
        aij = rows[i0][j]
        if aij == 0:
            continue
        total += aij * _hafnian_rec(rows, rest[:pos] + rest[pos + 1:])
    return total


def hafnian(a):
    """Hafnian of a symmetric matrix by recursive pairing on the first index.

    Odd dimension returns 0 and the empty matrix returns 1 by convention.
    Equals the number of perfect matchings when ``a`` is a 0/1 adjacency
    matrix.  Returns an exact int for all-integer input.
    """
    arr = np.asarray(a, dtype=float)
    rows = _as_square_rows(a)
    n = len(rows)
    if n > HAFNIAN_CAP:
        raise SizeLimit(f"hafnian limited to {HAFNIAN_CAP}x{HAFNIAN_CAP}, got {n}")
    if n and np.max(np.abs(arr - arr.T)) > 1e-12:
        raise NotSymmetric("matrix is not symmetric within 1e-12")
    if n % 2 == 1:
        return 0
    if _is_integral(rows):
        return _hafnian_rec([[int(x) for x in row] for row in rows], list(range(n)))
    return float(_hafnian_rec(rows, list(range(n))))


def _hafnian_exact_subset(weights: dict[Edge, Fraction], subset: tuple[int, ...]) -> Fraction:
    """Exact weighted hafnian of the induced subgraph on ``subset``."""
    if len(subset) % 2 == 1:
        return Fraction(0)
    idx = list(subset)

    def rec(remaining: list[int]) -> Fraction:
        if not remaining:
            return Fraction(1)
        i0 = remaining[0]
        rest = remaining[1:]
        total = Fraction(0)
        for pos, j in enumerate(rest):
            w = weights.get((i0, j) if i0 < j else (j, i0))
            if w:
                total += w * rec(rest[:pos] + rest[pos + 1:])
        return total

    return rec(idx)


# ----------------------------------------------------------------------
# Matching enumeration and partition profiles
# ----------------------------------------------------------------------

def enumerate_matchings(g: Graph, max_vertices: int = MATCHING_ENUM_CAP) -> dict[int, list[Matching]]:
    """All matchings of ``g`` grouped by size (exhaustive, duplicate-free)."""
    if g.vertex_count > max_vertices:
        raise SizeLimit(f"matching enumeration capped at {max_vertices} vertices")
    edges = g.edges
    out: dict[int, list[Matching]] = {0: [Matching(g)]}
    chosen: list[Edge] = []
    used = [False] * g.vertex_count

    def rec(start: int) -> None:
        for i in range(start, len(edges)):
            u, v = edges[i]
            if used[u] or used[v]:
                continue
            used[u] = used[v] = True
            chosen.append(edges[i])
            out.setdefault(len(chosen), []).append(Matching(g, tuple(chosen)))
            rec(i + 1)
            chosen.pop()
            used[u] = used[v] = False

    rec(0)
    return out


def enumerate_perfect_matchings(g: Graph, max_vertices: int = MATCHING_ENUM_CAP) -> list[frozenset[Edge]]:
    """Perfect matchings only, by always matching the lowest unmatched vertex."""
    if g.vertex_count > max_vertices:
        raise SizeLimit(f"perfect-matching enumeration capped at {max_vertices} vertices")
    if g.vertex_count % 2 == 1:
        return []
    adj: list[list[int]] = [[] for _ in range(g.vertex_count)]
    for u, v in g.edges:
        adj[u].append(v)
        adj[v].append(u)
    matched = [False] * g.vertex_count
    chosen: list[Edge] = []
    found: list[frozenset[Edge]] = []

    def rec() -> None:
        u = next((w for w in range(g.vertex_count) if not matched[w]), None)
        if u is None:
            found.append(frozenset(chosen))
            return
        matched[u] = True
        for v in adj[u]:
            if not matched[v]:
                matched[v] = True
                chosen.append((u, v) if u < v else (v, u))
                rec()
                chosen.pop()
                matched[v] = False
        matched[u] = False

    rec()
    return found


@dataclass(frozen=True)
class PartitionProfile:
    """Total matching weight per size, in exact arithmetic.

    ``z_by_size[k]`` is the sum over k-edge matchings of the product of
    edge weights; index 0 is always 1 (the empty matching).
    """

    z_by_size: tuple[Fraction, ...]

    @property
    def total(self) -> Fraction:
        return sum(self.z_by_size, Fraction(0))

    def as_floats(self) -> list[float]:
        return [float(z) for z in self.z_by_size]

    def __getitem__(self, k: int) -> Fraction:
        return self.z_by_size[k]

    def __len__(self) -> int:
        return len(self.z_by_size)


def _weight_profile(g: Graph, weights: dict[Edge, Fraction]) -> list[Fraction]:
    """Matching-sum vector over induced subgraphs, memoized on vertex bitmask."""
    n = g.vertex_count
    adj: list[list[tuple[int, Fraction]]] = [[] for _ in range(n)]
    for (u, v), w in weights.items():
        adj[u].append((v, w))
        adj[v].append((u, w))
    memo: dict[int, list[Fraction]] = {0: [Fraction(1)]}

    def rec(mask: int) -> list[Fraction]:
        cached = memo.get(mask)
        if cached is not None:
            return cached
        v = (mask & -mask).bit_length() - 1
        out = list(rec(mask & (mask - 1)))  # v stays unmatched
        for u, w in adj[v]:
            if mask >> u & 1:
                sub = rec(mask & ~(1 << v) & ~(1 << u))
                while len(out) < len(sub) + 1:
                    out.append(Fraction(0))
                for k, val in enumerate(sub):
                    out[k + 1] += w * val
        memo[mask] = out
        return out

    full = rec((1 << n) - 1) if n else [Fraction(1)]
    full = full + [Fraction(0)] * (n // 2 + 1 - len(full))
    return full


def partition_profile(g: Graph, max_vertices: int = MATCHING_ENUM_CAP) -> PartitionProfile:
    """Exact per-size matching weights Z_0..Z_{n//2} of a weighted graph."""
    if g.vertex_count > max_vertices:
        raise SizeLimit(f"partition profile capped at {max_vertices} vertices")
    weights = {e: Fraction(w) for e, w in g.weights.items()}
    return PartitionProfile(z_by_size=tuple(_weight_profile(g, weights)))


def matching_count_profile(g: Graph, max_vertices: int = MATCHING_ENUM_CAP) -> list[int]:
    """Number of matchings per size, ignoring weights."""
    if g.vertex_count > max_vertices:
        raise SizeLimit(f"matching counts capped at {max_vertices} vertices")
    ones = {e: Fraction(1) for e in g.edges}
    return [int(z) for z in _weight_profile(g, ones)]


# ----------------------------------------------------------------------
# Exact target distributions
# ----------------------------------------------------------------------

def exact_pm_distribution(g: Graph, max_vertices: int = MATCHING_ENUM_CAP) -> dict[frozenset[Edge], float]:
    """Probability of each perfect matching, proportional to its weight."""
    pms = enumerate_perfect_matchings(g, max_vertices)
    weights = {}
    for pm in pms:
        w = Fraction(1)
        for e in pm:
            w *= Fraction(g.weights[e])
        weights[pm] = w
    total = sum(weights.values(), Fraction(0))
    if total <= 0:
        raise ZeroNormalizer("graph has no perfect matching")
    return {pm: float(w / total) for pm, w in weights.items()}


def exact_gbs_distribution(g: Graph, c: float, max_vertices: int = GBS_ENUM_CAP) -> DistributionTable:
    """Exact table over even vertex subsets, weighting S by c^(2|S|) Haf(A_S)^2.

    A_S is the weighted adjacency of the induced subgraph; the empty subset
    always carries weight 1, so the normalizer is positive.
    """
    if not c > 0:
        raise ValueError(f"scale must be positive, got {c}")
    n = g.vertex_count
    if n > max_vertices:
        raise SizeLimit(f"exact GBS table capped at {max_vertices} vertices")
    weights = {e: Fraction(w) for e, w in g.weights.items()}
    c2 = Fraction(c) ** 2
    table: dict[tuple, Fraction] = {}
    for mask in range(1 << n):
        subset = tuple(v for v in range(n) if mask >> v & 1)
        if len(subset) % 2 == 1:
            continue
        haf = _hafnian_exact_subset(weights, subset)
        if haf == 0:
            continue
        table[subset] = c2 ** len(subset) * haf * haf
    return _normalized_table(table)


def occupancy_patterns(m: int, n: int) -> list[tuple[int, ...]]:
    """All length-m non-negative integer tuples summing to n, in lex order."""
    if m == 1:
        return [(n,)]
    out = []
    for first in range(n, -1, -1):
        for rest in occupancy_patterns(m - 1, n - first):
            out.append((first,) + rest)
    return sorted(out)


def _row_repeat(rows: list[list[Fraction]], z: tuple[int, ...]) -> list[list[Fraction]]:
    out = []
    for i, zi in enumerate(z):
        out.extend([rows[i]] * zi)
    return out


def exact_bs_distribution(a, max_patterns: int = PHI_CAP) -> DistributionTable:
    """Exact occupancy table, weighting z by Perm(A_z)^2 / prod(z_i!).

    A_z stacks z_i copies of row i of the matrix.  Raises ZeroNormalizer
    when every pattern has a vanishing permanent.
    """
    arr = np.asarray(a, dtype=float)
    m, n = arr.shape
    if math.comb(n + m - 1, m - 1) > max_patterns:
        raise SizeLimit(f"more than {max_patterns} occupancy patterns")
    rows = [[Fraction(x) for x in row] for row in arr.tolist()]
    table: dict[tuple, Fraction] = {}
    for z in occupancy_patterns(m, n):
        perm = _permanent_ryser(_row_repeat(rows, z))
        if perm == 0:
            continue
        denom = 1
        for zi in z:
            denom *= math.factorial(zi)
        table[z] = Fraction(perm) ** 2 / denom
    return _normalized_table(table)


def gadget_closed_form(gadget: BipartiteGadget) -> dict[tuple, Fraction]:
    """Per-pattern total perfect-matching weight of the gadget.

    The weight of pattern z is the number of ways to pick the matched row
    copies, binom(k, z_i) per row, times the squared permanent of A_z from
    matching both column sides.
    """
    m, n, k = gadget.rows, gadget.cols, gadget.k
    rows = [[Fraction(x) for x in row] for row in gadget.matrix.tolist()]
    out: dict[tuple, Fraction] = {}
    for z in occupancy_patterns(m, n):
        ways = 1
        for zi in z:
            ways *= math.comb(k, zi)
        if ways == 0:
            continue
        perm = _permanent_ryser(_row_repeat(rows, z))
        if perm == 0:
            continue
        out[z] = ways * Fraction(perm) ** 2
    return out


def exact_gadget_distribution(
    gadget: BipartiteGadget,
    max_patterns: int = PHI_CAP,
    max_vertices: int = MATCHING_ENUM_CAP,
) -> DistributionTable:
    """Exact occupancy distribution induced by the gadget's perfect matchings.

    Evaluated in closed form over occupancy patterns; when the gadget is
    small enough, an independent perfect-matching enumeration must agree
    exactly and is cross-checked here.
    """
    m, n = gadget.rows, gadget.cols
    closed_ok = math.comb(n + m - 1, m - 1) <= max_patterns
    enum_ok = gadget.graph.vertex_count <= max_vertices
    if not (closed_ok or enum_ok):
        raise SizeLimit("gadget too large for both the closed form and enumeration")

    closed = gadget_closed_form(gadget) if closed_ok else None
    enumerated: dict[tuple, Fraction] | None = None
    if enum_ok:
        enumerated = {}
        for pm_edges in enumerate_perfect_matchings(gadget.graph, max_vertices):
            w = Fraction(1)
            for e in pm_edges:
                w *= Fraction(gadget.graph.weights[e])
            z = extract_occupancy(Matching(gadget.graph, pm_edges), gadget)
            enumerated[z] = enumerated.get(z, Fraction(0)) + w
    if closed is not None and enumerated is not None and closed != enumerated:
        raise AssertionError("closed-form and enumerated gadget tables disagree")
    return _normalized_table(closed if closed is not None else enumerated)
