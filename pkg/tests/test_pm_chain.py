import numpy as np
import pytest

from bosonmatch.errors import NoPerfectMatching, RetryBudgetExceeded
from bosonmatch.exact import exact_gadget_distribution, exact_pm_distribution, tv_distance
from bosonmatch.corpus import bipartite_corpus
from bosonmatch.graphs import Graph, Matching, bipartite_graph, bs_gadget, extract_occupancy, path_graph
from bosonmatch.matching_chain import ChainConfig
from bosonmatch.pm_chain import (
    HoleWeights,
    anneal_hole_weights,
    compute_hole_weights_exact,
    max_bipartite_matching,
    pm_chain_step,
    sample_perfect_matching,
)
from bosonmatch.verify import (
    detailed_balance_error,
    empirical_distribution,
    pm_transition_matrix,
    stationary_distribution,
)


class TestHoleWeightsExact:
    def test_single_edge_uses_empty_permanent(self):
        g = bipartite_graph(np.array([[1.0]]))
        hw = compute_hole_weights_exact(g)
        assert hw.w == {(0, 1): 1.0}

    def test_complete_2x2_unit(self):
        hw = compute_hole_weights_exact(bipartite_graph(np.ones((2, 2))))
        assert set(hw.w.values()) == {2.0}
        assert len(hw.w) == 4

    def test_identity_omits_unsupported(self):
        hw = compute_hole_weights_exact(bipartite_graph(np.eye(2)))
        assert hw.w == {(0, 2): 1.0, (1, 3): 1.0}

    def test_no_perfect_matching(self):
        g = Graph(2, {})  # two isolated vertices, balanced but unmatched
        with pytest.raises(NoPerfectMatching):
            compute_hole_weights_exact(g)

    def test_kuhn_finds_maximum(self):
        g = bipartite_graph(np.array([[1.0, 1.0], [1.0, 0.0]]))
        pairing = max_bipartite_matching(g, [0, 1], [2, 3])
        assert len(pairing) == 2


class TestPmTransitionMatrix:
    @pytest.mark.parametrize("name_g", bipartite_corpus(), ids=lambda ng: ng[0])
    def test_reversibility_and_conditional(self, name_g):
        name, g = name_g
        hw = compute_hole_weights_exact(g)
        states, p, lam = pm_transition_matrix(g, hw)
        assert np.allclose(p.sum(axis=1), 1.0, atol=1e-13)
        assert detailed_balance_error(p, lam) <= 1e-10
        pi = stationary_distribution(p)
        target = lam / lam.sum()
        assert np.max(np.abs(pi - target)) <= 1e-10
        # conditional on perfect equals the weight-proportional PM law
        perfect = [i for i, m in enumerate(states) if m.is_perfect()]
        mass = sum(pi[i] for i in perfect)
        n = g.vertex_count
        assert mass >= 1.0 / (n * n + 1.0)
        pm_table = exact_pm_distribution(g)
        for i in perfect:
            key = states[i].edges
            assert pi[i] / mass == pytest.approx(pm_table[key], abs=1e-10)


class TestPmChainStep:
    def test_removal_acceptance_is_hole_weight_over_edge(self, stub_rng):
        g = bipartite_graph(np.ones((2, 2)))
        hw = compute_hole_weights_exact(g)
        m = Matching(g, ((0, 2), (1, 3)))
        # pick edge (0,2): removal ratio hw/lam = 2 -> accepted outright
        idx = g.edges.index((0, 2))
        u01 = 0.5 + (idx + 0.5) / (2 * g.edge_count)
        pm_chain_step(m, g, hw, stub_rng([u01]))
        assert m.unmatched_vertices() == [0, 2]

    def test_addition_closes_holes(self, stub_rng):
        g = bipartite_graph(np.ones((2, 2)))
        hw = HoleWeights(w={k: 8.0 for k in compute_hole_weights_exact(g).w}, mode="oracle-exact",
                         left=(0, 1), right=(2, 3))
        m = Matching(g, ((1, 3),))  # holes (0, 2)
        idx = g.edges.index((0, 2))
        u01 = 0.5 + (idx + 0.5) / (2 * g.edge_count)
        # ratio = lam/hw = 1/8; first draw 0.9 rejects, then 0.05 accepts
        pm_chain_step(m, g, hw, stub_rng([u01, 0.9]))
        assert not m.is_perfect()
        pm_chain_step(m, g, hw, stub_rng([u01, 0.05]))
        assert m.is_perfect()

    def test_slide_moves_hole(self, stub_rng):
        g = bipartite_graph(np.ones((2, 2)))
        hw = compute_hole_weights_exact(g)
        m = Matching(g, ((1, 3),))  # holes (0, 2); edge (0,3) slides hole to (1, 2)
        idx = g.edges.index((0, 3))
        u01 = 0.5 + (idx + 0.5) / (2 * g.edge_count)
        pm_chain_step(m, g, hw, stub_rng([u01]))
        assert m.edges == frozenset({(0, 3)})
        assert sorted(m.unmatched_vertices()) == [1, 2]

    def test_rejects_invalid_state(self, stub_rng):
        g = bipartite_graph(np.ones((2, 2)))
        hw = compute_hole_weights_exact(g)
        with pytest.raises(ValueError):
            pm_chain_step(Matching(g), g, hw, stub_rng([0.9]))


class TestSamplePerfectMatching:
    def test_unique_pm_always_returned(self):
        g = path_graph(4)
        for seed in range(5):
            m = sample_perfect_matching(g, 0.1, ChainConfig(seed=seed, max_steps_override=200))
            assert m.edges == frozenset({(0, 1), (2, 3)})

    def test_weighted_k22_frequencies(self):
        g = bipartite_graph(np.array([[2.0, 1.0], [1.0, 2.0]]))
        counts = {}
        n = 4000
        for i in range(n):
            m = sample_perfect_matching(g, 0.05, ChainConfig(seed=i, max_steps_override=500))
            counts[m.edges] = counts.get(m.edges, 0) + 1
        heavy = counts[frozenset({(0, 2), (1, 3)})] / n
        sigma = (0.8 * 0.2 / n) ** 0.5
        assert abs(heavy - 0.8) <= 3 * sigma + 0.01

    def test_gadget_occupancy_matches_exact(self):
        # hit rate is ~1/65 (64 active hole classes), so the budget must
        # cover a long geometric tail across 3000 draws
        a = np.ones((3, 2))
        gadget = bs_gadget(a, 2)
        target = exact_gadget_distribution(gadget)
        outcomes = []
        for i in range(3000):
            m = sample_perfect_matching(
                gadget.graph, 0.1, ChainConfig(seed=10_000 + i, max_steps_override=2000),
                retry_budget=2048, retry_steps=500,
            )
            outcomes.append(extract_occupancy(m, gadget))
        emp = empirical_distribution(outcomes)
        assert tv_distance(emp, target) < 0.06

    def test_no_perfect_matching_raises(self):
        g = Graph(4, {(0, 1): 1.0, (0, 3): 1.0})  # vertex 2 isolated
        with pytest.raises(NoPerfectMatching):
            sample_perfect_matching(g, 0.1, ChainConfig(seed=0))

    def test_retry_budget_exceeded_with_bad_weights(self):
        g = bipartite_graph(np.ones((2, 2)))
        # huge hole weights trap the chain in near-perfect states
        bad = HoleWeights(
            w={k: 1e9 for k in compute_hole_weights_exact(g).w},
            mode="oracle-exact", left=(0, 1), right=(2, 3),
        )
        with pytest.raises(RetryBudgetExceeded):
            sample_perfect_matching(
                g, 0.1, ChainConfig(seed=3, max_steps_override=200),
                hole_weights=bad, retry_budget=4,
            )


class TestAnneal:
    def test_complete_2x2_within_factor_two(self):
        g = bipartite_graph(np.ones((2, 2)))
        hw = anneal_hole_weights(g, 6, ChainConfig(seed=5))
        exact = compute_hole_weights_exact(g)
        for k, v in exact.w.items():
            assert v / 2 <= hw.w[k] <= 2 * v

    def test_unique_pm_path_finite(self):
        hw = anneal_hole_weights(path_graph(4), 4, ChainConfig(seed=5))
        assert all(v > 0 for v in hw.w.values())

    def test_identity_domain_matches_oracle(self):
        g = bipartite_graph(np.eye(3))
        hw = anneal_hole_weights(g, 6, ChainConfig(seed=5))
        exact = compute_hole_weights_exact(g)
        assert set(hw.w) == set(exact.w)

    def test_schedule_length_validated(self):
        with pytest.raises(ValueError):
            anneal_hole_weights(path_graph(4), 0, ChainConfig(seed=1))
