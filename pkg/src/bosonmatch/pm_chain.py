"""Weighted perfect-matching sampler for balanced bipartite graphs.

The chain walks over perfect and near-perfect matchings.  Near-perfect
states with unmatched pair (u, v) are reweighted by a hole weight w(u, v);
with the oracle-exact weights (ratio of permanents) every hole class
carries the same stationary mass as the perfect class, which keeps the
perfect-state hit rate bounded below by 1/(#classes + 1).

Moves mirror the all-matchings chain: lazy coin, then a uniform edge
proposal interpreted as removal (from a perfect state), addition (the edge
closes the holes), or a slide along the hole, accepted by the Metropolis
ratio of reweighted state weights.  Conditioned on perfect states the
stationary distribution is weight-proportional regardless of the hole
weights; only efficiency depends on their quality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import AnnealDiverged, NoPerfectMatching, RetryBudgetExceeded
from .exact import _permanent_ryser
from .graphs import Graph, Matching, bipartition_of
from .matching_chain import ChainConfig
from .rng import derive_seed

__all__ = [
    "PM_EXACT_CAP",
    "HoleWeights",
    "compute_hole_weights_exact",
    "pm_required_steps",
    "pm_chain_step",
    "sample_perfect_matching",
    "anneal_hole_weights",
    "max_bipartite_matching",
]

PM_EXACT_CAP = 12


@dataclass(frozen=True)
class HoleWeights:
    """Per-hole-pair reweighting for the near-perfect states.

    ``w`` maps (left vertex, right vertex) to a positive weight; pairs with
    no near-perfect support are omitted.  ``mode`` records how the weights
    were obtained ("oracle-exact" or "annealed").
    """

    w: dict[tuple[int, int], float]
    mode: str
    left: tuple[int, ...]
    right: tuple[int, ...]

    def as_dense(self, vertex_count: int) -> np.ndarray:
        dense = np.zeros((vertex_count, vertex_count))
        for (u, v), val in self.w.items():
            dense[u, v] = val
        return dense

    def is_left(self, vertex: int) -> bool:
        return vertex in self._left_set  # type: ignore[attr-defined]

    def __post_init__(self) -> None:
        object.__setattr__(self, "_left_set", frozenset(self.left))


def _bipartition_balanced(g: Graph) -> tuple[list[int], list[int]]:
    parts = bipartition_of(g)
    if parts is None:
        raise ValueError("graph is not bipartite")
    left, right = parts
    if len(left) != len(right):
        # Isolated vertices are colored left by default; rebalance if possible.
        if len(left) > len(right):
            movable = [v for v in left if not g.neighbors(v)]
            while len(left) > len(right) and movable:
                v = movable.pop()
                left.remove(v)
                right.append(v)
    if len(left) != len(right):
        raise NoPerfectMatching(f"parts have sizes {len(left)} and {len(right)}")
    return sorted(left), sorted(right)


def max_bipartite_matching(g: Graph, left: list[int], right: list[int]) -> dict[int, int]:
    """Maximum matching (left vertex -> right vertex) by augmenting paths."""
    right_index = {v: i for i, v in enumerate(right)}
    adj = {u: [v for v in g.neighbors(u)] for u in left}
    match_right: list[int] = [-1] * len(right)

    def try_augment(u: int, visited: list[bool]) -> bool:
        for v in adj[u]:
            i = right_index[v]
            if visited[i]:
                continue
            visited[i] = True
            if match_right[i] == -1 or try_augment(match_right[i], visited):
                match_right[i] = u
                return True
        return False

    for u in left:
        try_augment(u, [False] * len(right))
    return {match_right[i]: right[i] for i in range(len(right)) if match_right[i] != -1}


def _initial_perfect_matching(g: Graph, left: list[int], right: list[int]) -> Matching:
    pairing = max_bipartite_matching(g, left, right)
    if len(pairing) < len(left):
        raise NoPerfectMatching("maximum matching leaves vertices uncovered")
    return Matching(g, tuple(pairing.items()))


def compute_hole_weights_exact(g: Graph) -> HoleWeights:
    """Hole weights from exact permanents of the weighted biadjacency matrix.

    w(u, v) is the total weight of perfect matchings divided by the total
    weight of near-perfect matchings with holes exactly (u, v); pairs whose
    denominator vanishes are omitted.
    """
    left, right = _bipartition_balanced(g)
    q = len(left)
    if q > PM_EXACT_CAP:
        raise ValueError(f"exact hole weights capped at part size {PM_EXACT_CAP}, got {q}")
    rows = [[g.weight(u, v) for v in right] for u in left]
    if all(float(x).is_integer() for row in rows for x in row):
        rows = [[int(x) for x in row] for row in rows]
    full = _permanent_ryser(rows)
    if full == 0:
        raise NoPerfectMatching("biadjacency permanent is zero")
    w: dict[tuple[int, int], float] = {}
    for i, u in enumerate(left):
        for j, v in enumerate(right):
            minor = _permanent_ryser(
                [[x for jj, x in enumerate(row) if jj != j] for ii, row in enumerate(rows) if ii != i]
            )
            if minor != 0:
                w[(u, v)] = float(full) / float(minor)
    return HoleWeights(w=w, mode="oracle-exact", left=tuple(left), right=tuple(right))


def pm_required_steps(g: Graph, epsilon: float, config: ChainConfig) -> int:
    """Step budget per sampling period, same functional form as the
    all-matchings chain; overridden by the config when set."""
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must be in (0,1), got {epsilon}")
    if config.max_steps_override is not None:
        return config.max_steps_override
    lam = max(1.0, g.max_weight())
    n = g.vertex_count
    m = g.edge_count
    if n == 0 or m == 0:
        return 0
    return math.ceil(config.step_constant * lam * m * n * n * math.log(n * lam / epsilon))


def default_retry_budget(epsilon: float) -> int:
    return 64 * max(1, math.ceil(math.log(1.0 / epsilon)))


def _holes_of(m: Matching, hw: HoleWeights) -> tuple[int, int]:
    free = m.unmatched_vertices()
    if not free:
        return (-1, -1)
    if len(free) != 2:
        raise ValueError("state is neither perfect nor near-perfect")
    a, b = free
    return (a, b) if hw.is_left(a) else (b, a)


def pm_chain_step(m: Matching, g: Graph, hw: HoleWeights, rng: np.random.Generator) -> Matching:
    """One lazy Metropolis step over perfect/near-perfect states, in place."""
    if m.graph is not g:
        raise ValueError("matching does not belong to the graph")
    hole_l, hole_r = _holes_of(m, hw)
    u01 = rng.random()
    if u01 < 0.5 or g.edge_count == 0:
        return m
    edges = g.edges
    e = edges[int((u01 - 0.5) * 2.0 * len(edges))]
    a, b = e
    u, v = (a, b) if hw.is_left(a) else (b, a)
    weight = g.weights[e]
    if hole_l == -1:
        if m.partner(u) != v:
            return m
        ratio = hw.w[(u, v)] / weight
        if ratio >= 1.0 or rng.random() < ratio:
            m.remove(u, v)
        return m
    if u == hole_l and v == hole_r:
        ratio = weight / hw.w[(hole_l, hole_r)]
        if ratio >= 1.0 or rng.random() < ratio:
            m.add(u, v)
        return m
    if u == hole_l:
        x = m.partner(v)
        new_hw = hw.w.get((x, hole_r), 0.0)
        ratio = weight * new_hw / (g.weight(x, v) * hw.w[(hole_l, hole_r)])
        if ratio >= 1.0 or (ratio > 0 and rng.random() < ratio):
            m.remove(x, v)
            m.add(u, v)
        return m
    if v == hole_r:
        y = m.partner(u)
        new_hw = hw.w.get((hole_l, y), 0.0)
        ratio = weight * new_hw / (g.weight(u, y) * hw.w[(hole_l, hole_r)])
        if ratio >= 1.0 or (ratio > 0 and rng.random() < ratio):
            m.remove(u, y)
            m.add(u, v)
        return m
    return m


def oriented_edge_arrays(g: Graph, hw: HoleWeights) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Edge arrays with the left endpoint first, in sorted edge order."""
    es = g.edges
    eu = np.zeros(len(es), np.int64)
    ev = np.zeros(len(es), np.int64)
    w = np.zeros(len(es), np.float64)
    for i, (a, b) in enumerate(es):
        u, v = (a, b) if hw.is_left(a) else (b, a)
        eu[i], ev[i], w[i] = u, v, g.weights[(a, b)]
    return eu, ev, w


def _partner_edge_array(g: Graph, m: Matching) -> np.ndarray:
    index = {e: i for i, e in enumerate(g.edges)}
    arr = np.full(g.vertex_count, -1, np.int64)
    for e in m.edges:
        arr[e[0]] = index[e]
        arr[e[1]] = index[e]
    return arr


def _matching_from_partner(g: Graph, partner_edge: np.ndarray) -> Matching:
    edges = g.edges
    m = Matching(g)
    for vertex, e in enumerate(partner_edge):
        if e != -1 and edges[e][0] == vertex:
            m.add(*edges[e])
    return m


def sample_perfect_matching(
    g: Graph,
    epsilon: float,
    config: ChainConfig,
    hole_weights: HoleWeights | None = None,
    retry_budget: int | None = None,
    retry_steps: int | None = None,
) -> Matching:
    """Draw a perfect matching with probability proportional to its weight.

    Runs the chain from an arbitrary perfect matching for the step budget,
    then keeps extending by further periods until the state is perfect,
    raising RetryBudgetExceeded when the per-draw budget runs out (a signal
    of bad hole weights or an undersized budget).
    """
    left, right = _bipartition_balanced(g)
    start = _initial_perfect_matching(g, left, right)
    if hole_weights is None:
        if len(left) <= PM_EXACT_CAP:
            hole_weights = compute_hole_weights_exact(g)
        else:
            hole_weights = anneal_hole_weights(g, 8, config)
    steps = pm_required_steps(g, epsilon, config)
    period = steps if retry_steps is None else retry_steps
    budget = default_retry_budget(epsilon) if retry_budget is None else retry_budget
    eu, ev, w = oriented_edge_arrays(g, hole_weights)
    dense = hole_weights.as_dense(g.vertex_count)
    partner_edge = _partner_edge_array(g, start)
    hole_l = hole_r = -1
    for attempt in range(budget):
        hole_l, hole_r = kernels.pm_run(
            eu, ev, w, dense, partner_edge, hole_l, hole_r,
            steps if attempt == 0 else period,
            kernels.as_seed(derive_seed(config.seed, attempt)),
        )
        if hole_l == -1:
            return _matching_from_partner(g, partner_edge)
    raise RetryBudgetExceeded(f"no perfect state after {budget} periods of {steps} steps")


def anneal_hole_weights(
    g: Graph,
    schedule_length: int,
    config: ChainConfig,
    steps_per_stage: int | None = None,
    bounds: tuple[float, float] = (1e-12, 1e12),
) -> HoleWeights:
    """Estimate hole weights without the permanent oracle.

    Starts from the complete bipartite relaxation, where the exact weights
    are uniformly the part size, and moves every edge weight geometrically
    toward its target over the schedule (absent edges decay toward a
    negligible floor).  After each stage the weight of every visited hole
    class is scaled by the ratio of perfect-state to class occupation
    frequencies, whose fixed point is the oracle-exact table.
    """
    if schedule_length < 1:
        raise ValueError("schedule_length must be a positive integer")
    left, right = _bipartition_balanced(g)
    q = len(left)
    if steps_per_stage is None:
        steps_per_stage = max(20_000, 400 * q * q)
    lo, hi = bounds
    min_weight = min(g.weights.values(), default=1.0)
    floor = 1e-6 * min_weight

    pairs = [(u, v) for u in left for v in right]
    target = {(u, v): g.weight(u, v) if g.has_edge(u, v) else floor for (u, v) in pairs}
    hw_map = {p: float(q) for p in pairs}
    n_v = g.vertex_count

    # Identity pairing of the complete relaxation; valid at every stage.
    partner_pairs = list(zip(left, right))

    counts = None
    for stage in range(1, schedule_length + 1):
        frac = stage / schedule_length
        stage_weights = {p: target[p] ** frac for p in pairs}
        stage_graph = Graph(n_v, {(min(u, v), max(u, v)): w for (u, v), w in stage_weights.items()})
        hw = HoleWeights(w=dict(hw_map), mode="annealed", left=tuple(left), right=tuple(right))
        eu, ev, w = oriented_edge_arrays(stage_graph, hw)
        dense = hw.as_dense(n_v)
        partner_edge = _partner_edge_array(stage_graph, Matching(stage_graph, tuple(partner_pairs)))
        counts, perfect, _, _ = kernels.pm_visit_counts(
            eu, ev, w, dense, partner_edge, -1, -1, steps_per_stage, kernels.as_seed(derive_seed(config.seed, stage))
        )
        if perfect == 0:
            raise AnnealDiverged(f"no perfect visits at stage {stage}")
        for u, v in pairs:
            c = counts[u, v]
            if c > 0:
                hw_map[(u, v)] *= float(perfect) / float(c)
                if not lo <= hw_map[(u, v)] <= hi:
                    raise AnnealDiverged(f"estimate for {(u, v)} left [{lo}, {hi}]")

    # Final pass on the true graph decides which classes have support.
    hw = HoleWeights(w=dict(hw_map), mode="annealed", left=tuple(left), right=tuple(right))
    start = _initial_perfect_matching(g, left, right)
    eu, ev, w = oriented_edge_arrays(g, hw)
    dense = hw.as_dense(n_v)
    partner_edge = _partner_edge_array(g, start)
    counts, perfect, _, _ = kernels.pm_visit_counts(
        eu, ev, w, dense, partner_edge, -1, -1, steps_per_stage, kernels.as_seed(derive_seed(config.seed, 0))
    )
    if perfect == 0:
        raise AnnealDiverged("no perfect visits on the target graph")
    final: dict[tuple[int, int], float] = {}
    for u, v in pairs:
        c = counts[u, v]
        if c > 0:
            val = hw_map[(u, v)] * float(perfect) / float(c)
            if not lo <= val <= hi:
                raise AnnealDiverged(f"estimate for {(u, v)} left [{lo}, {hi}]")
            final[(u, v)] = val
    return HoleWeights(w=final, mode="annealed", left=tuple(left), right=tuple(right))
