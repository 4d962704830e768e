import math

import numpy as np
import pytest

from markovbin import (
    ChainParams,
    CoupledState,
    MeetingSample,
    coupled_transition_law,
    empirical_pmf,
    exact_pmf,
    sample_blocks,
    sample_chain,
    sample_meeting_times,
    sample_sums,
    step_coupled,
    tv_distance,
)


class TestSampleChain:
    def test_deterministic_given_seed(self):
        params = ChainParams(0.3, 0.6)
        first = sample_chain(params, 200, "stationary", seed=5)
        second = sample_chain(params, 200, "stationary", seed=5)
        assert np.array_equal(first.path, second.path)
        assert first.total == second.total

    def test_total_excludes_anchor(self):
        sample = sample_chain(ChainParams(0.3, 0.6), 50, "state1", seed=1)
        assert sample.path[0] == 1
        assert sample.total == int(sample.path[1:].sum())

    def test_sticky_ones_dominate(self):
        sample = sample_chain(ChainParams(0.95, 0.95), 2000, "stationary", seed=2)
        assert sample.total > 1700


class TestSampleSums:
    def test_prefix_stable_in_num_samples(self):
        params = ChainParams(0.3, 0.6)
        small = sample_sums(params, 25, "stationary", 7, seed=3)
        large = sample_sums(params, 25, "stationary", 5000, seed=3)
        assert np.array_equal(small, large[:7])

    def test_agrees_with_exact_law(self):
        params = ChainParams(0.3, 0.6)
        sums = sample_sums(params, 20, "stationary", 200_000, seed=8)
        tv = tv_distance(empirical_pmf(sums, support_max=20), exact_pmf(params, 20))
        assert tv <= 0.01

    def test_empirical_pmf_normalized(self):
        pmf = empirical_pmf(np.array([0, 1, 1, 3]), support_max=4)
        assert pmf.mass == pytest.approx([0.25, 0.5, 0.0, 0.25, 0.0])


class TestCoupledKernel:
    def test_split_law_example(self):
        law = coupled_transition_law(ChainParams(0.3, 0.6), CoupledState(1, 0))
        assert law[(0, 0)] == pytest.approx(0.4)
        assert law[(1, 1)] == pytest.approx(0.3)
        assert law[(1, 0)] == pytest.approx(0.3)

    def test_split_swaps_when_beta_below_alpha(self):
        law = coupled_transition_law(ChainParams(0.6, 0.3), CoupledState(1, 0))
        assert law[(0, 1)] == pytest.approx(0.3)

    def test_equal_rates_meet_in_one_step(self):
        law = coupled_transition_law(ChainParams(0.4, 0.4), CoupledState(1, 0))
        assert set(law) == {(0, 0), (1, 1)}
        assert sum(law.values()) == pytest.approx(1.0)

    @pytest.mark.parametrize("alpha,beta", [(0.3, 0.6), (0.6, 0.3), (0.17, 0.94)])
    def test_marginals_equal_chain_rows(self, alpha, beta):
        # each coordinate, viewed alone, moves by its own row of the
        # transition matrix; checked by exact enumeration of the kernel
        params = ChainParams(alpha, beta)
        matrix = params.transition_matrix
        for z1 in (0, 1):
            for z0 in (0, 1):
                law = coupled_transition_law(params, CoupledState(z1, z0))
                assert sum(law.values()) == pytest.approx(1.0, abs=1e-15)
                to_one_first = sum(p for (a, _), p in law.items() if a == 1)
                to_one_second = sum(p for (_, b), p in law.items() if b == 1)
                assert to_one_first == pytest.approx(matrix[z1, 1], abs=1e-15)
                assert to_one_second == pytest.approx(matrix[z0, 1], abs=1e-15)

    def test_marginal_fidelity_monte_carlo(self):
        # 10^6 sampled transitions from the split state: each coordinate's
        # empirical one-step law within 4 sigma of its chain row
        params = ChainParams(0.3, 0.6)
        rng = np.random.default_rng(99)
        states = [step_coupled(params, CoupledState(1, 0), rng) for _ in range(2000)]
        ones_first = sum(s.z1 for s in states) / len(states)
        sigma = math.sqrt(0.6 * 0.4 / len(states))
        assert abs(ones_first - 0.6) <= 4 * sigma
        # full scale through the lockstep sampler: the first transition from
        # (1, 0) lands on (0, 0) w.p. 0.4, on (1, 1) w.p. 0.3
        samples = 1_000_000
        runs = sample_meeting_times(params, samples, seed=12)
        met_at_one = np.mean((runs.varsigma == 1) & (runs.tau > 1))
        met_at_zero = np.mean((runs.varsigma == 1) & (runs.tau == 1))
        assert abs(met_at_one - 0.3) <= 4 * math.sqrt(0.3 * 0.7 / samples)
        assert abs(met_at_zero - 0.4) <= 4 * math.sqrt(0.4 * 0.6 / samples)

    def test_step_coupled_absorbing(self):
        params = ChainParams(0.3, 0.6)
        rng = np.random.default_rng(4)
        state = CoupledState(1, 1)
        for _ in range(200):
            state = step_coupled(params, state, rng)
            assert state.z1 == state.z0


class TestMeetingTimes:
    def test_equal_rates_meet_immediately(self):
        runs = sample_meeting_times(ChainParams(0.4, 0.4), 10_000, seed=6)
        assert np.all(runs.varsigma == 1)

    def test_tail_geometric(self):
        samples = 100_000
        runs = sample_meeting_times(ChainParams(0.3, 0.6), samples, seed=7)
        for m in range(1, 6):
            target = 0.3 ** (m - 1)
            sigma = math.sqrt(target * (1.0 - target) / samples)
            assert abs(runs.varsigma_tail(m) - target) <= 4 * sigma + 1e-12

    def test_tau_dominates_varsigma(self):
        runs = sample_meeting_times(ChainParams(0.1, 0.8), 50_000, seed=9)
        assert np.all(runs.tau >= runs.varsigma)
        assert np.all(runs.varsigma >= 1)
        assert runs.absorption_violations == 0

    def test_prefix_stable_in_num_samples(self):
        params = ChainParams(0.1, 0.8)
        small = sample_meeting_times(params, 10, seed=31)
        large = sample_meeting_times(params, 20_000, seed=31)
        assert np.array_equal(small.varsigma, large.varsigma[:10])
        assert np.array_equal(small.tau, large.tau[:10])

    def test_censoring_at_step_cap(self):
        runs = sample_meeting_times(ChainParams(0.1, 0.8), 5000, seed=13, step_cap=2)
        assert int(runs.censored.sum()) > 0
        assert np.all(runs.tau[runs.censored] == 2)
        # censored runs count as >= cap in tail fractions
        assert runs.tau_tail(2) >= float(np.mean(runs.censored))

    def test_collection_protocol(self):
        runs = sample_meeting_times(ChainParams(0.3, 0.6), 50, seed=1)
        assert len(runs) == 50
        sample = runs[3]
        assert isinstance(sample, MeetingSample)
        assert sample.tau >= sample.varsigma >= 1
        assert len(list(iter(runs))) == 50

    def test_sample_invariant_enforced(self):
        with pytest.raises(ValueError):
            MeetingSample(varsigma=3, tau=2)


class TestBlocks:
    def test_mean_one_at_half(self):
        blocks = sample_blocks(ChainParams(0.5, 0.3), 100_000, seed=21)
        assert blocks.xi_odd.mean() == pytest.approx(1.0, abs=0.03)
        blocks = sample_blocks(ChainParams(0.3, 0.5), 100_000, seed=22)
        assert blocks.xi_even.mean() == pytest.approx(1.0, abs=0.03)

    def test_matches_block_constants(self):
        blocks = sample_blocks(ChainParams(0.1, 0.8), 400_000, seed=23)
        assert blocks.xi_odd.mean() == pytest.approx(9.0, rel=0.02)
        assert blocks.xi_even.mean() == pytest.approx(4.0, rel=0.02)
        assert blocks.xi_odd.var() == pytest.approx(90.0, rel=0.05)
        assert blocks.xi_even.var() == pytest.approx(20.0, rel=0.05)

    def test_components_uncorrelated(self):
        blocks = sample_blocks(ChainParams(0.3, 0.6), 200_000, seed=24)
        corr = np.corrcoef(blocks.xi_odd, blocks.xi_even)[0, 1]
        assert abs(corr) <= 0.01

    def test_prefix_stable_in_num_samples(self):
        params = ChainParams(0.2, 0.7)
        small = sample_blocks(params, 8, seed=25)
        large = sample_blocks(params, 9000, seed=25)
        assert np.array_equal(small.xi_odd, large.xi_odd[:8])
        assert np.array_equal(small.xi_even, large.xi_even[:8])

    def test_collection_protocol(self):
        blocks = sample_blocks(ChainParams(0.3, 0.6), 10, seed=1)
        assert len(blocks) == 10
        assert blocks[0].xi_odd >= 0 and blocks[0].xi_even >= 0
