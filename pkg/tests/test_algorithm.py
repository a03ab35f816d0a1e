"""Algorithm driver, decision rule, noisy runs and the classical query bound."""

import cmath
import math

import numpy as np
import pytest

from paritylab.errors import (
    InvalidDimensionError,
    InvalidSpecError,
    ParityUndefinedError,
    SelfCheckError,
    UnsupportedDimensionError,
)
from paritylab.services import algorithm
from paritylab.services.algorithm import Parity, ParityOutcome, QueryOracle
from paritylab.services.qudit import MeasurementDistribution, PermutationSpec, Sign, equal_exactly

# ── Ideal runs ──────────────────────────────────────────────


@pytest.mark.parametrize("d", range(3, 13))
def test_ideal_runs_are_deterministic(d):
    for spec in PermutationSpec.all_specs(d):
        final_state, outcome, queries = algorithm.run_ideal(spec)
        assert outcome.parity == algorithm.expected_parity(spec)
        assert outcome.success_prob == pytest.approx(1.0, abs=1e-9)
        assert queries == 1


@pytest.mark.parametrize("d", range(3, 13))
def test_final_state_phases(d):
    for spec in PermutationSpec.all_specs(d):
        run = algorithm.run_ideal(spec)
        assert equal_exactly(run.final_state, algorithm.expected_final_state(spec))


def test_final_state_examples_d4():
    run = algorithm.run_ideal(PermutationSpec(3, Sign.POSITIVE, 4))
    assert run.outcome.outcome_index == 1
    assert run.final_state.amps[1] == pytest.approx(cmath.exp(-3j * math.pi / 2))

    run = algorithm.run_ideal(PermutationSpec(0, Sign.NEGATIVE, 4))
    assert run.outcome.outcome_index == 3
    assert run.final_state.amps[3] == pytest.approx(1.0)

    for m in range(4):
        run = algorithm.run_ideal(PermutationSpec(m, Sign.NEGATIVE, 4))
        assert run.final_state.amps[3] == pytest.approx(cmath.exp(-2j * math.pi * 3 * m / 4))


def test_oracle_counts_every_evaluation():
    oracle = QueryOracle(PermutationSpec(2, "-", 5))
    assert oracle.query(1) == 1
    assert oracle.query_count == 1
    algorithm.run_algorithm(oracle)
    assert oracle.query_count == 2
    assert oracle.reveal().m == 2


def test_run_ideal_rejects_d2():
    with pytest.raises(ParityUndefinedError):
        algorithm.run_ideal(PermutationSpec(0, "+", 2))


# ── Decision rule ───────────────────────────────────────────


def test_decide_parity_examples():
    pos = algorithm.decide_parity(MeasurementDistribution([0, 1, 0, 0]))
    assert (pos.parity, pos.outcome_index, pos.success_prob) == (Parity.POSITIVE, 1, 1.0)
    neg = algorithm.decide_parity(MeasurementDistribution([0, 0, 0, 1]))
    assert (neg.parity, neg.outcome_index, neg.success_prob) == (Parity.NEGATIVE, 3, 1.0)
    flat = algorithm.decide_parity(MeasurementDistribution([0.25] * 4))
    assert flat.parity == Parity.INCONCLUSIVE


def test_decide_parity_tie_is_inconclusive():
    tie = algorithm.decide_parity(MeasurementDistribution([0, 0.5, 0, 0.5]))
    assert tie.parity == Parity.INCONCLUSIVE
    assert tie.outcome_index == -1
    assert tie.success_prob == pytest.approx(0.5)


def test_decide_parity_stable_under_small_perturbations():
    base = np.array([0.02, 0.90, 0.03, 0.05])
    for eps in (1e-3, -1e-3, 1e-2):
        probs = base + np.array([0, eps, 0, -eps])
        assert algorithm.decide_parity(MeasurementDistribution(probs)).parity == Parity.POSITIVE


def test_outcome_from_single_index():
    assert ParityOutcome.from_index(1, 5).parity == Parity.POSITIVE
    assert ParityOutcome.from_index(4, 5).parity == Parity.NEGATIVE
    assert ParityOutcome.from_index(2, 5).parity == Parity.INCONCLUSIVE


# ── Classical bound ─────────────────────────────────────────


@pytest.mark.parametrize("d", [3, 4, 5, 6])
def test_one_query_certificate(d):
    report = algorithm.classical_one_query_lower_bound(d)
    assert report.strategies_enumerated == d * 2 ** d
    assert report.best_one_query_worst_case == 0.5
    assert report.best_one_query_average == 0.5
    assert report.deterministic_spec_worst_case == 0.0
    assert report.two_query_success == 1.0
    assert report.quantum_queries == 1
    assert report.speedup_ratio == 2.0
    assert len(report.witness_pairs) == d * d


def test_witness_example_d4():
    report = algorithm.classical_one_query_lower_bound(4)
    pair = next(w for w in report.witness_pairs if w.x == 0 and w.y == 2)
    assert (pair.positive_m, pair.negative_m) == (2, 2)


@pytest.mark.parametrize("d", [2, 9])
def test_lower_bound_range(d):
    with pytest.raises(InvalidDimensionError):
        algorithm.classical_one_query_lower_bound(d)


def test_lower_bound_rejects_broken_witnesses(monkeypatch):
    # mirrored oracle: every answer is still reachable but the witness offsets no longer match
    monkeypatch.setattr(PermutationSpec, "evaluate", lambda self, x: (self.m - self.sign.factor * x) % self.dim)
    with pytest.raises(SelfCheckError):
        algorithm.classical_one_query_lower_bound(4)


def test_two_query_strategy_d4():
    for spec in PermutationSpec.all_specs(4):
        oracle = QueryOracle(spec)
        assert algorithm.two_query_strategy(oracle) == algorithm.expected_parity(spec)
        assert oracle.query_count == 2


def test_speedup_table():
    rows = algorithm.speedup_table(3, 8)
    assert [r["d"] for r in rows] == list(range(3, 9))
    assert all(r["quantum_queries"] == 1 and r["classical_queries"] == 2 for r in rows)
    assert all(r["ratio"] == 2.0 for r in rows)


# ── Noisy runs ──────────────────────────────────────────────


def test_noisy_run_with_ideal_noise(ideal_noise):
    for spec in PermutationSpec.all_specs(4):
        run = algorithm.run_noisy(spec, ideal_noise, shots=500, rng_seed=1)
        assert run.outcome.parity == algorithm.expected_parity(spec)
        assert run.outcome.success_prob == 1.0


def test_noisy_run_calibrated(calibrated_noise):
    run = algorithm.run_noisy(PermutationSpec(1, "+", 4), calibrated_noise, shots=100_000, rng_seed=7)
    assert 0.85 < run.outcome.success_prob < 1.0
    again = algorithm.run_noisy(PermutationSpec(1, "+", 4), calibrated_noise, shots=100_000, rng_seed=7)
    assert again.record == run.record


def test_noisy_run_is_d4_only(calibrated_noise):
    with pytest.raises(UnsupportedDimensionError):
        algorithm.run_noisy(PermutationSpec(1, "+", 5), calibrated_noise, shots=10, rng_seed=0)


def test_noisy_run_counts_one_oracle_query(calibrated_noise):
    run = algorithm.run_noisy(PermutationSpec(2, "-", 4), calibrated_noise, shots=1000, rng_seed=3)
    assert run.queries_used == 1
    oracle = QueryOracle(PermutationSpec(2, "-", 4))
    oracle.circuit_settings()
    assert oracle.query_count == 1


def test_sweep_band(calibrated_noise):
    summary = algorithm.sweep_hardware(calibrated_noise, shots=100_000, seed=2015, repeats=3)
    assert len(summary.results) == 8
    assert 0.88 <= summary.average_success <= 0.99
    assert summary.average_majority_success == 1.0
    assert summary.reference_average_success == pytest.approx(0.93023)
    for r in summary.results:
        assert sum(r.measured_probs) == pytest.approx(1.0)


def test_sweep_ideal_noise(ideal_noise):
    summary = algorithm.sweep_hardware(ideal_noise, shots=1000, seed=1, repeats=2)
    assert all(r.success_mean == pytest.approx(1.0) for r in summary.results)


def test_sweep_is_reproducible(calibrated_noise):
    a = algorithm.sweep_hardware(calibrated_noise, shots=2000, seed=5, repeats=2)
    b = algorithm.sweep_hardware(calibrated_noise, shots=2000, seed=5, repeats=2)
    assert a == b


def test_exact_sweep_matches_sampling(calibrated_noise):
    exact = algorithm.exact_sweep_hardware(calibrated_noise)
    assert np.mean(exact) == pytest.approx(0.942, abs=1e-3)
    sampled = algorithm.sweep_hardware(calibrated_noise, shots=100_000, seed=31, repeats=2)
    for value, result in zip(exact, sampled.results):
        assert result.success_mean == pytest.approx(value, abs=0.005)


def test_sweep_rejects_zero_repeats(calibrated_noise):
    with pytest.raises(InvalidSpecError):
        algorithm.sweep_hardware(calibrated_noise, shots=100, seed=1, repeats=0)


def test_sweep_ideal_over_dimensions():
    summary = algorithm.sweep_ideal(3, 6)
    assert len(summary.results) == sum(2 * d for d in range(3, 7))
    assert summary.average_success == pytest.approx(1.0)
    with pytest.raises(InvalidDimensionError):
        algorithm.sweep_ideal(2, 4)
