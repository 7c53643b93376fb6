import numpy as np
import pytest

from bosonmatch.exact import DistributionTable, exact_bs_distribution, tv_distance
from bosonmatch.corpus import bipartite_corpus, connected_graphs, hafnian_extras, matrix_corpus
from bosonmatch.graphs import Graph, complete_graph, cycle_graph, empty_graph
from bosonmatch.verify import (
    VerificationReport,
    check_gadget_bias,
    check_lemma2,
    check_log_concavity,
    check_pm_percent,
    check_sampler_tv,
    empirical_distribution,
    noise_allowance,
    pick_test_k,
)


class TestEmpirical:
    def test_two_outcomes(self):
        t = empirical_distribution([("a",), ("a",), ("b",), ("b",)])
        assert t.entries == {("a",): 0.5, ("b",): 0.5}

    def test_single_sample(self):
        assert empirical_distribution([("a",)]).entries == {("a",): 1.0}

    def test_requires_samples(self):
        with pytest.raises(ValueError):
            empirical_distribution([])

    def test_coin_concentration(self):
        rng = np.random.default_rng(0)
        draws = [(int(x),) for x in rng.integers(0, 2, size=100_000)]
        t = empirical_distribution(draws)
        assert abs(t.p((0,)) - 0.5) < 0.01
        assert abs(t.p((1,)) - 0.5) < 0.01


class TestInequalityChecks:
    def test_lemma2_k2(self):
        r = check_lemma2(Graph(2, {(0, 1): 1.0}), 1.0)
        assert r.passed and r.observed == 4.0 and r.claimed_bound == 16.0

    def test_lemma2_k3(self):
        assert check_lemma2(complete_graph(3), 1.0).passed

    def test_lemma2_empty_two(self):
        r = check_lemma2(empty_graph(2), 1.0)
        assert r.passed and r.observed == 2.0 and r.claimed_bound == 16.0

    def test_log_concavity_c4(self):
        assert check_log_concavity(cycle_graph(4)).passed

    def test_log_concavity_k4(self):
        assert check_log_concavity(complete_graph(4)).passed

    def test_log_concavity_single_edge_vacuous(self):
        assert check_log_concavity(Graph(2, {(0, 1): 1.0})).passed

    def test_pm_percent_k2(self):
        r = check_pm_percent(Graph(2, {(0, 1): 1.0}), 1.0)
        # boosted profile (1, 64, 512): total 577 < 2 * 512
        assert r.passed and r.observed == 577.0 and r.claimed_bound == 1024.0


class TestSamplerTv:
    def test_exact_resampler_passes(self):
        target = DistributionTable({(0,): 0.25, (1,): 0.75})
        rng = np.random.default_rng(1)
        outcomes = [((0,) if x < 0.25 else (1,)) for x in rng.random(100_000)]
        assert check_sampler_tv(target, outcomes, 0.0).passed

    def test_point_mass_fails(self):
        target = DistributionTable({(0,): 0.5, (1,): 0.5})
        r = check_sampler_tv(target, [(0,)] * 10_000, 0.3)
        assert not r.passed and r.observed == pytest.approx(0.5, abs=0.01)

    def test_noise_allowance_calibration(self):
        # resampling the target 100 times must produce at most 2 false failures
        target = DistributionTable({(i,): p for i, p in enumerate([0.4, 0.3, 0.2, 0.1])})
        rng = np.random.default_rng(2)
        keys = list(target.entries)
        probs = [target.entries[k] for k in keys]
        failures = 0
        for _ in range(100):
            idx = rng.choice(len(keys), size=5000, p=probs)
            outcomes = [keys[i] for i in idx]
            if not check_sampler_tv(target, outcomes, 0.0).passed:
                failures += 1
        assert failures <= 2

    def test_allowance_formula(self):
        assert noise_allowance(4, 10_000) == pytest.approx(3 * (4 / 10_000) ** 0.5)


class TestGadgetBiasCheck:
    def test_ones_2x2(self):
        reports = check_gadget_bias(np.ones((2, 2)), 0.5, name="ones-2x2")
        assert all(r.passed for r in reports)

    def test_reports_have_two_parts(self):
        reports = check_gadget_bias(np.ones((2, 1)), 0.1, name="x")
        names = {r.check_name for r in reports}
        assert names == {"gadget-bias-factor", "gadget-bias-tv"}


class TestPickTestK:
    def test_ones_2x2_needs_k4(self):
        # k=3 sits exactly at the eps/2 boundary, so the margin forces k=4
        assert pick_test_k(np.ones((2, 2)), 0.2) == 4

    def test_single_column_k1(self):
        assert pick_test_k(np.array([[1.0], [2.0]]), 0.2) == 1

    def test_certified_bias(self, matrices):
        from bosonmatch.exact import exact_gadget_distribution
        from bosonmatch.graphs import bs_gadget

        for name, a in matrices:
            if a.shape[0] > 3 or a.shape[1] > 2:
                continue
            k = pick_test_k(a, 0.2)
            tv = tv_distance(exact_gadget_distribution(bs_gadget(a, k)), exact_bs_distribution(a))
            assert tv <= 0.1, (name, k)


class TestCorpus:
    def test_connected_graph_counts(self):
        graphs = connected_graphs(6)
        by_n = {}
        for name, g in graphs:
            by_n[g.vertex_count] = by_n.get(g.vertex_count, 0) + 1
        assert by_n == {1: 1, 2: 1, 3: 2, 4: 6, 5: 21, 6: 112}

    def test_deterministic(self):
        a = [(name, g.edges) for name, g in connected_graphs(4)]
        b = [(name, g.edges) for name, g in connected_graphs(4)]
        assert a == b

    def test_all_connected(self):
        for name, g in connected_graphs(5):
            seen = {0}
            stack = [0]
            while stack:
                u = stack.pop()
                for v in g.neighbors(u):
                    if v not in seen:
                        seen.add(v)
                        stack.append(v)
            assert len(seen) == g.vertex_count, name

    def test_matrix_corpus_no_zero_columns(self):
        for name, a in matrix_corpus():
            assert not np.any(np.all(a == 0, axis=0)), name
            assert a.shape[1] <= a.shape[0]

    def test_bipartite_corpus_sizes(self):
        for name, g in bipartite_corpus():
            assert g.vertex_count <= 8, name

    def test_hafnian_extras_sizes(self):
        for name, g in hafnian_extras():
            assert 7 <= g.vertex_count <= 10, name


def test_report_serialization():
    r = VerificationReport("x", "item", 1.0, 0.5, True, 10)
    d = r.as_dict()
    assert d["check_name"] == "x" and d["passed"] is True and d["samples_used"] == 10
