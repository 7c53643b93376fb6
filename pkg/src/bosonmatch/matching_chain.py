"""Metropolis chain on all matchings of a weighted graph.

The chain is lazy (holds with probability 1/2), proposes a uniformly
random edge otherwise, and turns the proposal into an add, remove, or
slide move accepted with the Metropolis ratio of matching weights.  Its
stationary distribution gives each matching probability proportional to
the product of its edge weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .graphs import Graph, Matching

__all__ = ["ChainConfig", "chain_step", "required_steps", "sample_matching"]


@dataclass(frozen=True)
class ChainConfig:
    """Reproducibility contract for a chain run.

    ``step_constant`` multiplies the asymptotic step-count formula; the
    theory fixes only the growth rate, so the constant is an explicit knob
    validated empirically.  ``max_steps_override`` short-circuits the
    formula entirely.
    """

    seed: int
    epsilon: float = 0.05
    step_constant: float = 1.0
    max_steps_override: int | None = None

    def __post_init__(self) -> None:
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must be in (0,1), got {self.epsilon}")
        if not self.step_constant > 0:
            raise ValueError(f"step_constant must be positive, got {self.step_constant}")
        if self.max_steps_override is not None and self.max_steps_override < 1:
            raise ValueError("max_steps_override must be a positive integer")


def required_steps(g: Graph, epsilon: float, config: ChainConfig) -> int:
    """Step budget ceil(C * lam * m * n^2 * ln(n * lam / eps)).

    ``lam`` is the largest edge weight, floored at 1.  The override in the
    config wins when set.
    """
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


def chain_step(m: Matching, g: Graph, rng: np.random.Generator) -> Matching:
    """Advance the matching by one lazy Metropolis step, in place.

    With probability 1/2 the state holds.  Otherwise a uniform edge e is
    proposed: removal if e is in the matching, addition if both endpoints
    are free, a slide displacing the single blocking edge if exactly one
    endpoint is matched; two independently matched endpoints hold.
    """
    if m.graph is not g:
        raise ValueError("matching does not belong to the graph")
    u01 = rng.random()
    if u01 < 0.5 or g.edge_count == 0:
        return m
    edges = g.edges
    e = edges[int((u01 - 0.5) * 2.0 * len(edges))]
    u, v = e
    pu, pv = m.partner(u), m.partner(v)
    if pu == v:
        ratio = 1.0 / g.weights[e]
        apply_ = lambda: m.remove(u, v)
    elif pu == -1 and pv == -1:
        ratio = g.weights[e]
        apply_ = lambda: m.add(u, v)
    elif pu == -1:
        blocking = (v, pv) if v < pv else (pv, v)
        ratio = g.weights[e] / g.weights[blocking]

        def apply_():
            m.remove(*blocking)
            m.add(u, v)
    elif pv == -1:
        blocking = (u, pu) if u < pu else (pu, u)
        ratio = g.weights[e] / g.weights[blocking]

        def apply_():
            m.remove(*blocking)
            m.add(u, v)
    else:
        return m
    if ratio >= 1.0 or rng.random() < ratio:
        apply_()
    return m


def sample_matching(g: Graph, config: ChainConfig, epsilon: float | None = None) -> Matching:
    """Draw one matching by running the chain from empty for the step budget.

    The output distribution approaches the weight-proportional target as
    the step budget grows; identical (graph, config) pairs give identical
    outputs.
    """
    if g.vertex_count < 1:
        raise ValueError("graph must have at least one vertex")
    eps = config.epsilon if epsilon is None else epsilon
    steps = required_steps(g, eps, config)
    if g.edge_count == 0:
        return Matching(g)
    eu, ev, w = g.edge_arrays()
    partner_edge = kernels.matching_run(eu, ev, w, g.vertex_count, steps, kernels.as_seed(config.seed))
    edges = g.edges
    m = Matching(g)
    for vertex, e in enumerate(partner_edge):
        if e != -1 and edges[e][0] == vertex:
            m.add(*edges[e])
    return m
