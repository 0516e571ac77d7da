# test_experiments.py
import math
from fractions import Fraction

import numpy as np
import pytest

from models.errors import CapacityExceededError, InvalidParameterError
from models.schemas import ProportionEstimate, RngStream
from services import experiment_service
from services.chromatic_service import ChromaticService
from services.experiment_service import (
    ExperimentService, constant_sampler, draw_mapping, expected_Z0, expected_Z1, lambda_eps,
    non_increasing_within_ci, prime_decay, prime_formula, sample_mapping, wilson_interval,
)


@pytest.fixture
def experiments():
    return ExperimentService(workers=1)


class TestSampling:
    def test_stream_is_deterministic(self):
        a = draw_mapping(RngStream(master_seed=5, trial_index=3), 10)
        b = draw_mapping(RngStream(master_seed=5, trial_index=3), 10)
        c = draw_mapping(RngStream(master_seed=5, trial_index=4), 10)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_sample_mapping_range(self):
        mapping = sample_mapping(RngStream(master_seed=1, trial_index=0), 50)
        assert mapping.n == 50
        assert all(0 <= v < 50 for v in mapping.b)

    def test_sample_mapping_rejects_zero(self):
        with pytest.raises(InvalidParameterError):
            sample_mapping(RngStream(master_seed=1, trial_index=0), 0)

    def test_coordinates_uniform(self):
        n, draws = 5, 100_000
        samples = np.stack([draw_mapping(RngStream(master_seed=20240601, trial_index=t), n) for t in range(draws)])
        sigma = math.sqrt(0.2 * 0.8 / draws)
        for j in range(n):
            freq = np.bincount(samples[:, j], minlength=n) / draws
            assert np.all(np.abs(freq - 0.2) <= 4 * sigma), (j, freq)


class TestClosedForms:
    def test_prime_formula(self):
        assert prime_formula(3) == Fraction(7, 9)
        assert prime_formula(5) == Fraction(601, 625)
        with pytest.raises(InvalidParameterError):
            prime_formula(4)

    def test_prime_decay(self):
        decay = prime_decay(7)
        assert decay["non_sync"] == pytest.approx(5040 / 7 ** 7)
        assert decay["stirling"] == pytest.approx(decay["non_sync"], rel=0.02)

    def test_expected_Z1(self):
        assert expected_Z1(4) == Fraction(9, 8)
        assert expected_Z1(2) == Fraction(1, 2)
        assert expected_Z1(5) == 2 * Fraction(10, 25)

    def test_lambda_eps(self):
        assert lambda_eps(100, 0.05) == pytest.approx(2.25 / 400)

    def test_wilson_interval(self):
        low, high = wilson_interval(0, 10)
        assert low == pytest.approx(0.0, abs=1e-12) and 0 < high < 0.35
        low, high = wilson_interval(10, 10)
        assert high == pytest.approx(1.0) and low > 0.65
        low, high = wilson_interval(50, 100)
        assert low < 0.5 < high
        with pytest.raises(InvalidParameterError):
            wilson_interval(0, 0)

    @pytest.mark.parametrize("k", [1, 7, 400, 10_000])
    def test_wilson_interval_contains_extremes(self, k):
        low, high = wilson_interval(k, k)
        assert high == 1.0 and low < 1.0
        low, high = wilson_interval(0, k)
        assert low == 0.0 and high > 0.0

    def test_wilson_interval_contains_estimate(self):
        for trials in (3, 10, 97, 1000):
            for successes in range(0, trials + 1, max(1, trials // 7)):
                low, high = wilson_interval(successes, trials)
                assert low <= successes / trials <= high

    def test_non_increasing_within_ci(self):
        def estimate(low, high):
            return ProportionEstimate(successes=0, trials=1, estimate=(low + high) / 2, low=low, high=high)

        assert non_increasing_within_ci([estimate(0.1, 0.2), estimate(0.15, 0.25), estimate(0.0, 0.1)])
        assert not non_increasing_within_ci([estimate(0.0, 0.1), estimate(0.2, 0.3)])


class TestEnumeration:
    def test_sync_counts(self, experiments):
        assert experiments.enumerate_exact(2).sync_count == 2
        stats = experiments.enumerate_exact(3)
        assert (stats.sync_count, stats.total) == (21, 27)
        assert stats.permutation_count == 6

    def test_expected_D_n4(self, experiments):
        assert experiments.enumerate_exact(4).mean_D == Fraction(71, 64)

    @pytest.mark.parametrize("n", range(2, 7))
    def test_exact_moments_match_closed_forms(self, experiments, n):
        stats = experiments.enumerate_exact(n)
        chromatic = ChromaticService(max_n=14)
        assert stats.mean_D == chromatic.expected_D(n)
        assert stats.var_D == chromatic.variance_D(n)
        assert stats.mean_Z0 == expected_Z0(n)
        assert stats.mean_Z1 == expected_Z1(n)
        assert stats.mean_Z0 - stats.mean_Z1 >= Fraction(n // 2, 2) - 1
        assert stats.certificate_count <= stats.sync_count
        assert sum(stats.D_distribution.values()) == n ** n

    def test_capacity(self, experiments):
        with pytest.raises(CapacityExceededError):
            experiments.enumerate_exact(7)

    @pytest.mark.parametrize("p", [2, 3, 5])
    def test_prime_criterion(self, experiments, p):
        assert experiments.prime_criterion_check(p)
        sync_count, _, _ = experiments.count_synchronizing(p)
        assert sync_count == p ** p - math.factorial(p)

    def test_composite_has_counterexample(self, experiments):
        _, mismatches, first = experiments.count_synchronizing(4)
        assert mismatches > 0
        assert len(set(first)) < 4

    @pytest.mark.slow
    def test_prime_criterion_p7(self, experiments):
        assert experiments.prime_criterion_check(7)


class TestMonteCarlo:
    def test_records_in_trial_order(self, experiments):
        records, R = experiments.simulate(16, 50, seed=9)
        assert [r.trial for r in records] == list(range(50))
        assert R.shape == (50, 8)

    def test_deterministic_across_workers(self, monkeypatch):
        monkeypatch.setattr(experiment_service, "BLOCK_ELEMENTS", 2000)
        serial, R1 = ExperimentService(workers=1).simulate(24, 120, seed=11)
        parallel, R2 = ExperimentService(workers=3).simulate(24, 120, seed=11)
        assert serial == parallel
        assert np.array_equal(R1, R2)

    def test_single_state(self, experiments):
        records, _ = experiments.simulate(1, 5, seed=1)
        assert all(r.synchronizing and r.certificate_present for r in records)

    def test_rejects_zero_trials(self, experiments):
        with pytest.raises(InvalidParameterError):
            experiments.simulate(10, 0, seed=1)

    def test_estimate_sync_prob(self, experiments):
        summary = experiments.estimate_sync_prob(32, 400, seed=3)
        sync = summary.proportions["synchronizing"]
        assert sync.low <= sync.estimate <= sync.high
        assert summary.moments["Z0"].mean == pytest.approx(16, abs=1.5)
        assert len(summary.row_R) == 16

    def test_lemma_row_requires_large_n(self, experiments):
        with pytest.raises(InvalidParameterError):
            experiments.lemma_row_experiment(20, 10, 0.05, seed=1)

    def test_lemma_row_mcdiarmid(self, experiments):
        result = experiments.lemma_row_experiment(100, 20, 0.05, seed=1)
        assert result.mcdiarmid_value == pytest.approx(49.44, abs=0.01)
        assert result.params.alpha == pytest.approx(1 - math.exp(-1) - 0.05)

    def test_lemma_zero_exhaustive(self, experiments):
        result = experiments.lemma_zero_experiment(5, 1, 0.05, seed=1, exhaustive=True)
        assert result.trials == 5 ** 5
        assert result.exact_means["Z0"] == 2
        assert result.exact_means["Z1"] == expected_Z1(5)

    def test_lemma_zero_epsilon_range(self, experiments):
        with pytest.raises(InvalidParameterError):
            experiments.lemma_zero_experiment(16, 10, 0.5, seed=1)
        with pytest.raises(InvalidParameterError):
            experiments.lemma_zero_experiment(16, 10, 0.0, seed=1)
        result = experiments.lemma_zero_experiment(16, 50, 0.45, seed=1)
        assert result.params.beta == pytest.approx(0.05)

    def test_reduction_inequality(self, experiments):
        result = experiments.concentration_reduction_experiment(64, 300, 0.05, seed=4)
        assert result.holds
        assert result.params.nu == pytest.approx(0.4)

    def test_claim9_flags_degenerate_sampler(self, experiments):
        rows = experiments.claim9_experiment(10, 20, seed=1, sampler=constant_sampler)
        assert len(rows) == 5
        assert all(row.flagged and row.mean_R == 1 for row in rows)

    def test_claim9_uniform(self, experiments):
        rows = experiments.claim9_experiment(40, 300, seed=1)
        assert not any(row.flagged for row in rows)

    def test_row_tail(self, experiments):
        rows = experiments.row_tail_experiment(64, 100, 0.05, seed=2)
        assert [row["i"] for row in rows] == list(range(1, 33))
        assert all(0 <= row["freq"] <= 1 for row in rows)

    def test_rate_probe(self, experiments):
        rows = experiments.conjecture_rate_probe([8, 16], 100, seed=5)
        assert [row["n"] for row in rows] == [8, 16]


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_monte_carlo_matches_enumeration(experiments, n):
    exact = experiments.enumerate_exact(n)
    records, _ = experiments.simulate(n, 20_000, seed=77)
    trials = len(records)

    p = exact.sync_count / exact.total
    sync = sum(r.synchronizing for r in records) / trials
    assert abs(sync - p) <= 4 * math.sqrt(p * (1 - p) / trials)

    for name, mean, variance in (("D", exact.mean_D, exact.var_D), ("Z0", exact.mean_Z0, exact.var_Z0)):
        sample_mean = np.mean([getattr(r, name) for r in records])
        assert abs(sample_mean - float(mean)) <= 4 * math.sqrt(float(variance) / trials), name


def test_sync_probability_n3_matches_prime_formula(experiments):
    summary = experiments.estimate_sync_prob(3, 100_000, seed=20240601)
    sync = summary.proportions["synchronizing"]
    low, high = wilson_interval(sync.successes, sync.trials, confidence=0.999)
    assert low <= 7 / 9 <= high


@pytest.mark.slow
def test_sync_trend_large_n():
    experiments = ExperimentService(workers=4)
    estimates = []
    for n in (32, 64, 128, 256):
        summary = experiments.estimate_sync_prob(n, 10_000, seed=20240601)
        non_sync = summary.proportions["non_synchronizing"]
        assert non_sync.estimate <= 10 / n
        assert summary.moments["Z0"].variance / n < 2
        assert summary.moments["Z1"].variance / n < 2
        estimates.append(non_sync)
    assert non_increasing_within_ci(estimates)


@pytest.mark.slow
def test_lemma_trends():
    experiments = ExperimentService(workers=4)
    rows, zeros = [], []
    for n in (64, 128, 256):
        rows.append(experiments.lemma_row_experiment(n, 10_000, 0.05, seed=1).empirical)
        zeros.append(experiments.lemma_zero_experiment(n, 10_000, 0.05, seed=1).empirical)
    assert rows[-1].estimate <= 0.1 and zeros[-1].estimate <= 0.1
    assert non_increasing_within_ci(rows)
    assert non_increasing_within_ci(zeros)
