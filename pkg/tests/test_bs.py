import math

import numpy as np
import pytest

from bosonmatch.bs import BsRequest, choose_k, gadget_bias_report, sample_bs, sample_bs_batch
from bosonmatch.errors import NoPerfectMatching, ZeroNormalizer
from bosonmatch.exact import (
    exact_bs_distribution,
    exact_gadget_distribution,
    tv_distance,
)
from bosonmatch.graphs import bs_gadget
from bosonmatch.matching_chain import ChainConfig
from bosonmatch.verify import empirical_distribution, gadget_chain_plan, pick_test_k


class TestChooseK:
    def test_direct_formula(self):
        assert choose_k(2, 0.5) == 32
        assert choose_k(3, 0.1) == 360

    def test_ceiling_behavior(self):
        assert choose_k(1, 1 - 1e-9) == 5

    def test_validation(self):
        with pytest.raises(ValueError):
            choose_k(0, 0.5)
        with pytest.raises(ValueError):
            choose_k(2, 0.0)


class TestRequest:
    def test_rejects_negative_entries(self):
        with pytest.raises(ValueError):
            BsRequest(matrix=np.array([[-1.0]]), epsilon=0.1, chain=ChainConfig(seed=0))

    def test_rejects_zero_column(self):
        with pytest.raises(ZeroNormalizer):
            BsRequest(matrix=np.array([[1.0, 0.0], [1.0, 0.0]]), epsilon=0.1, chain=ChainConfig(seed=0))

    def test_zero_row_allowed(self):
        req = BsRequest(matrix=np.array([[1.0], [0.0]]), epsilon=0.1, chain=ChainConfig(seed=0))
        assert req.rows == 2

    def test_k_override(self):
        req = BsRequest(matrix=np.array([[1.0]]), epsilon=0.5, chain=ChainConfig(seed=0), k_override=3)
        assert req.k() == 3
        req = BsRequest(matrix=np.array([[1.0]]), epsilon=0.5, chain=ChainConfig(seed=0))
        assert req.k() == choose_k(1, 0.5)


class TestBiasReport:
    def test_multiplicity_one_exact(self):
        report = gadget_bias_report(np.ones((3, 2)), 100)
        for z, factor in report.items():
            if max(z) <= 1:
                assert factor == 1.0

    def test_pair_factor(self):
        report = gadget_bias_report(np.ones((2, 2)), 32)
        assert report[(2, 0)] == pytest.approx(31 / 32)
        assert report[(1, 1)] == 1.0

    def test_formula_k_meets_bound(self):
        n, eps = 2, 0.5
        report = gadget_bias_report(np.ones((3, n)), choose_k(n, eps))
        lo = math.exp(-eps / 2)
        assert min(report.values()) >= lo
        assert max(report.values()) <= 1.0


class TestSampling:
    def test_single_entry_always_one(self):
        req = BsRequest(matrix=np.array([[1.0]]), epsilon=0.5, chain=ChainConfig(seed=2, max_steps_override=100))
        for _ in range(3):
            assert sample_bs(req) == (1,)

    def test_two_rows_weighted(self):
        a = np.array([[1.0], [2.0]])
        req = BsRequest(matrix=a, epsilon=0.1, chain=ChainConfig(seed=4, max_steps_override=400), k_override=1)
        draws = sample_bs_batch(req, 20_000, retry_budget=512)
        emp = empirical_distribution(draws)
        target = exact_bs_distribution(a)  # (1,0): 1/5, (0,1): 4/5; k=1 is exact for n=1
        assert tv_distance(emp, target) < 0.02

    def test_fig1_style_matrix(self):
        a = np.ones((3, 2))
        k = pick_test_k(a, 0.2)
        gadget = bs_gadget(a, k)
        burn, retry = gadget_chain_plan(gadget.graph, gadget.part_size)
        req = BsRequest(matrix=a, epsilon=0.2, chain=ChainConfig(seed=6, max_steps_override=burn), k_override=k)
        draws = sample_bs_batch(req, 20_000, retry_budget=8192, retry_steps=retry)
        emp = empirical_distribution(draws)
        assert tv_distance(emp, exact_gadget_distribution(gadget)) < 0.02
        assert tv_distance(emp, exact_bs_distribution(a)) < 0.2

    def test_outputs_in_pattern_set(self):
        a = np.array([[1.0, 2.0], [1.0, 1.0]])
        req = BsRequest(matrix=a, epsilon=0.2, chain=ChainConfig(seed=8, max_steps_override=2000), k_override=2)
        for z in sample_bs_batch(req, 1000, retry_budget=4096, retry_steps=400):
            assert len(z) == 2 and sum(z) == 2 and min(z) >= 0

    def test_no_perfect_matching_when_k_too_small(self):
        # both columns live only in row 1, which has a single copy
        a = np.array([[1.0, 1.0], [0.0, 0.0]])
        req = BsRequest(matrix=a, epsilon=0.2, chain=ChainConfig(seed=1, max_steps_override=100), k_override=1)
        with pytest.raises(NoPerfectMatching):
            sample_bs_batch(req, 10)

    def test_determinism_and_worker_independence(self):
        a = np.ones((2, 2))
        req = BsRequest(matrix=a, epsilon=0.2, chain=ChainConfig(seed=10, max_steps_override=1000), k_override=2)
        x = sample_bs_batch(req, 300, workers=1, retry_budget=4096, retry_steps=300)
        y = sample_bs_batch(req, 300, workers=2, retry_budget=4096, retry_steps=300)
        assert x == y


class TestGadgetCloseness:
    def test_monotone_in_k(self, matrices):
        # doubling k never increases the exact gadget-vs-target distance
        for name, a in matrices:
            if a.shape[0] > 3 or a.shape[1] > 2:
                continue
            try:
                mu = exact_bs_distribution(a)
            except ZeroNormalizer:
                continue
            for k in (2, 4):
                d1 = tv_distance(exact_gadget_distribution(bs_gadget(a, k)), mu)
                d2 = tv_distance(exact_gadget_distribution(bs_gadget(a, 2 * k)), mu)
                assert d2 <= d1 + 1e-12, (name, k)

    def test_formula_k_within_half_epsilon(self):
        for eps in (0.1, 0.5):
            a = np.ones((2, 2))
            k = choose_k(2, eps)
            tv = tv_distance(exact_gadget_distribution(bs_gadget(a, k)), exact_bs_distribution(a))
            assert tv <= eps / 2
