"""End-to-end sampler for the non-negative boson-sampling distribution.

Pipeline: choose the copy count k from the error budget, build the
bipartite gadget, sample one of its perfect matchings with half the error
budget, and read off the occupancy pattern.  The gadget distribution over
patterns is within eps/2 of the target in total variation because each
pattern picks up only a multiplicative factor between exp(-eps/2) and 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import RetryBudgetExceeded, ZeroNormalizer
from .graphs import BipartiteGadget, bs_gadget
from .matching_chain import ChainConfig
from .pm_chain import (
    PM_EXACT_CAP,
    HoleWeights,
    _bipartition_balanced,
    _initial_perfect_matching,
    _partner_edge_array,
    anneal_hole_weights,
    compute_hole_weights_exact,
    default_retry_budget,
    oriented_edge_arrays,
    pm_required_steps,
)
from .exact import occupancy_patterns

__all__ = [
    "BsRequest",
    "choose_k",
    "sample_bs",
    "sample_bs_batch",
    "gadget_bias_report",
]


def choose_k(n: int, epsilon: float) -> int:
    """Copies per row needed for an eps/2 gadget bias: ceil(4 n^2 / eps)."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must be in (0,1), got {epsilon}")
    return math.ceil(4 * n * n / epsilon)


@dataclass(frozen=True)
class BsRequest:
    """Inputs for one boson-sampling run.

    ``k_override`` replaces the conservative formula value of k; callers
    using it should confirm the gadget bias stays within budget (see
    `gadget_bias_report` and the exact gadget distribution).
    """

    matrix: np.ndarray
    epsilon: float
    chain: ChainConfig
    k_override: int | None = None

    def __post_init__(self) -> None:
        a = np.asarray(self.matrix, dtype=float)
        if a.ndim != 2:
            raise ValueError("matrix must be 2-D")
        if np.any(a < 0):
            raise ValueError("matrix entries must be non-negative")
        if np.any(np.all(a == 0, axis=0)):
            raise ZeroNormalizer("matrix has an all-zero column")
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must be in (0,1), got {self.epsilon}")
        if self.k_override is not None and self.k_override < 1:
            raise ValueError("k_override must be a positive integer")
        object.__setattr__(self, "matrix", a)

    @property
    def rows(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def cols(self) -> int:
        return int(self.matrix.shape[1])

    def k(self) -> int:
        return self.k_override if self.k_override is not None else choose_k(self.cols, self.epsilon)


def _gadget_hole_weights(
    gadget: BipartiteGadget,
    config: ChainConfig,
    mode: str,
    anneal_stages: int,
) -> HoleWeights:
    if mode == "oracle":
        return compute_hole_weights_exact(gadget.graph)
    if mode == "anneal":
        return anneal_hole_weights(gadget.graph, anneal_stages, config)
    if mode == "auto":
        if gadget.part_size <= PM_EXACT_CAP:
            return compute_hole_weights_exact(gadget.graph)
        return anneal_hole_weights(gadget.graph, anneal_stages, config)
    raise ValueError(f"unknown weight mode {mode!r}")


def sample_bs_batch(
    req: BsRequest,
    n_samples: int,
    workers: int | None = None,
    pm_weight_mode: str = "auto",
    anneal_stages: int = 8,
    retry_budget: int | None = None,
    retry_steps: int | None = None,
) -> list[tuple[int, ...]]:
    """Draw independent occupancy patterns; deterministic for a fixed seed.

    The perfect-matching chain runs with error eps/2; each draw starts
    from a fixed perfect matching of the gadget and extends its run until
    it lands on a perfect state, within the retry budget.  ``retry_steps``
    shortens the periods after burn-in (the perfect-state indicator
    decorrelates much faster than the full state).
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    k = req.k()
    gadget = bs_gadget(req.matrix, k)
    chain_eps = req.epsilon / 2.0
    hw = _gadget_hole_weights(gadget, req.chain, pm_weight_mode, anneal_stages)
    g = gadget.graph
    left, right = _bipartition_balanced(g)
    start = _initial_perfect_matching(g, left, right)
    steps = pm_required_steps(g, chain_eps, req.chain)
    period = steps if retry_steps is None else retry_steps
    budget = default_retry_budget(chain_eps) if retry_budget is None else retry_budget
    eu, ev, w = oriented_edge_arrays(g, hw)
    dense = hw.as_dense(g.vertex_count)
    partner0 = _partner_edge_array(g, start)

    m, n = req.rows, req.cols
    group_of = np.full(g.vertex_count, -1, np.int64)
    for j in range(m):
        for t in range(k):
            group_of[gadget.row_vertex(j, t, 1)] = j

    if workers is not None and kernels.HAVE_NUMBA:
        import numba

        numba.set_num_threads(max(1, workers))
    z, attempts, ok = kernels.bs_batch(
        eu, ev, w, dense, partner0, n, group_of, m, steps, period, budget, n_samples, kernels.as_seed(req.chain.seed)
    )
    if not np.all(ok):
        bad = int(np.argmin(ok))
        raise RetryBudgetExceeded(
            f"draw {bad} saw no perfect state in {budget} periods of {steps} steps"
        )
    return [tuple(int(x) for x in row) for row in z]


def sample_bs(req: BsRequest, **kwargs) -> tuple[int, ...]:
    """Draw one occupancy pattern from the boson-sampling pipeline."""
    return sample_bs_batch(req, 1, **kwargs)[0]


def gadget_bias_report(a, k: int, max_patterns: int = 100_000) -> dict[tuple[int, ...], float]:
    """Multiplicative gadget bias per occupancy pattern.

    For pattern z the finite copy count contributes the factor
    prod_i prod_{j<z_i} (1 - j/k), always in [exp(-2 n^2 / k), 1]; with
    k = ceil(4 n^2 / eps) the factor stays above exp(-eps/2).
    """
    arr = np.asarray(a, dtype=float)
    m, n = arr.shape
    if k < 1:
        raise ValueError("k must be a positive integer")
    if math.comb(n + m - 1, m - 1) > max_patterns:
        raise ValueError(f"more than {max_patterns} occupancy patterns")
    report: dict[tuple[int, ...], float] = {}
    for z in occupancy_patterns(m, n):
        factor = 1.0
        for zi in z:
            for j in range(zi):
                factor *= 1.0 - j / k
        report[z] = factor
    return report
