"""Qudit linear algebra, encoding and feed-forward readout tests."""

import cmath
import math

import numpy as np
import pytest

from paritylab.errors import (
    DimensionMismatchError,
    EncodingError,
    InvalidDimensionError,
    InvalidSpecError,
    InvalidStateError,
    ParityUndefinedError,
    UnsupportedDimensionError,
)
from paritylab.services.qudit import (
    MeasurementDistribution,
    PermutationSpec,
    QuditState,
    Sign,
    UnitaryOp,
    apply,
    bits_to_qudit_index,
    equal_exactly,
    equal_up_to_global_phase,
    inverse_qft,
    measure_distribution,
    permutation_unitary,
    product_state,
    qft,
    qudit_index_to_bits,
    semiclassical_iqft_distribution,
    semiclassical_iqft_measure,
    semiclassical_iqft_sample,
)

S2 = 1 / math.sqrt(2)
FOURIER_ONE_STATE = np.array([1, 1j, -1, -1j]) / 2


def _reflection(d: int) -> np.ndarray:
    mat = np.zeros((d, d), dtype=complex)
    for j in range(d):
        mat[(-j) % d, j] = 1
    return mat


# ── Fourier transform ───────────────────────────────────────


def test_qft_of_one_d4():
    out = apply(qft(4), QuditState.basis(4, 1))
    assert equal_exactly(out, FOURIER_ONE_STATE, tol=1e-12)


def test_qft_of_zero_d2_is_hadamard():
    out = apply(qft(2), QuditState.basis(2, 0))
    assert equal_exactly(out, [S2, S2])


def test_qft_of_one_d3():
    w = cmath.exp(2j * math.pi / 3)
    out = apply(qft(3), QuditState.basis(3, 1))
    assert equal_exactly(out, np.array([1, w, w ** 2]) / math.sqrt(3))


@pytest.mark.parametrize("d", [0, 1, -3])
def test_qft_rejects_small_dimension(d):
    with pytest.raises(InvalidDimensionError):
        qft(d)


@pytest.mark.parametrize("d", range(2, 17))
def test_inverse_qft_undoes_qft(d):
    product = inverse_qft(d) @ qft(d)
    np.testing.assert_allclose(product.mat, np.eye(d), atol=1e-9)


def test_inverse_qft_recovers_basis_state():
    assert equal_exactly(apply(inverse_qft(4), QuditState(FOURIER_ONE_STATE)), QuditState.basis(4, 1))
    assert equal_exactly(apply(inverse_qft(5), apply(qft(5), QuditState.basis(5, 3))), QuditState.basis(5, 3))


def test_prepared_product_factorisation():
    prepared = product_state([S2, -S2], [S2, 1j * S2])
    assert equal_exactly(prepared, apply(qft(4), QuditState.basis(4, 1)), tol=1e-12)


# ── Permutations ────────────────────────────────────────────


def test_permutation_examples():
    assert equal_exactly(permutation_unitary(PermutationSpec(0, "+", 4)), np.eye(4))
    assert equal_exactly(apply(permutation_unitary(PermutationSpec(2, "+", 4)), QuditState.basis(4, 1)),
                         QuditState.basis(4, 3))
    assert equal_exactly(apply(permutation_unitary(PermutationSpec(0, "-", 4)), QuditState.basis(4, 1)),
                         QuditState.basis(4, 3))


@pytest.mark.parametrize("d", range(3, 13))
def test_shift_structure(d):
    shift = permutation_unitary(PermutationSpec(1, Sign.POSITIVE, d))
    for m in range(d):
        pos = permutation_unitary(PermutationSpec(m, Sign.POSITIVE, d))
        neg = permutation_unitary(PermutationSpec(m, Sign.NEGATIVE, d))
        assert equal_exactly(pos, shift.power(m))
        assert equal_exactly(neg.mat, pos.mat @ _reflection(d))


@pytest.mark.parametrize("d", range(3, 17))
def test_fourier_columns_are_shift_eigenvectors(d):
    shift = permutation_unitary(PermutationSpec(1, "+", d)).mat
    f = qft(d).mat
    for k in range(d):
        np.testing.assert_allclose(shift @ f[:, k], cmath.exp(-2j * math.pi * k / d) * f[:, k], atol=1e-9)


def test_parity_undefined_for_d2():
    with pytest.raises(ParityUndefinedError):
        PermutationSpec(0, "+", 2)


def test_spec_rejects_out_of_range_m():
    with pytest.raises(InvalidSpecError):
        PermutationSpec(4, "+", 4)
    with pytest.raises(InvalidSpecError):
        PermutationSpec(0, "sideways", 4)


def test_all_specs_order():
    labels = [s.label for s in PermutationSpec.all_specs(4)]
    assert labels == ["f_0^+", "f_1^+", "f_2^+", "f_3^+", "f_0^-", "f_1^-", "f_2^-", "f_3^-"]


# ── Value types ─────────────────────────────────────────────


def test_state_must_be_normalised():
    with pytest.raises(InvalidStateError):
        QuditState([1, 1, 0])


def test_unitary_check():
    with pytest.raises(InvalidStateError):
        UnitaryOp([[1, 1], [0, 1]])


def test_apply_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        apply(qft(4), QuditState.basis(3, 0))


def test_measure_distribution_examples():
    np.testing.assert_allclose(measure_distribution(QuditState.basis(4, 1)).probs, [0, 1, 0, 0])
    np.testing.assert_allclose(measure_distribution(QuditState(FOURIER_ONE_STATE)).probs, [0.25] * 4)
    phased = QuditState.basis(4, 1).with_phase(cmath.exp(-1j * math.pi))
    np.testing.assert_allclose(measure_distribution(phased).probs, [0, 1, 0, 0])


def test_global_phase_invariance(random_state):
    s = random_state(7)
    c = cmath.exp(0.73j)
    np.testing.assert_allclose(measure_distribution(s.with_phase(c)).probs, measure_distribution(s).probs, atol=1e-12)
    assert equal_up_to_global_phase(s.with_phase(c), s)
    assert not equal_exactly(s.with_phase(c), s)


def test_distribution_clamps_rounding_noise():
    dist = MeasurementDistribution([0.5, 0.5, -1e-13])
    assert dist.probs[2] == 0.0
    with pytest.raises(InvalidStateError):
        MeasurementDistribution([0.6, 0.5, -0.1])


# ── Binary encoding ─────────────────────────────────────────


def test_encoding_examples():
    assert qudit_index_to_bits(2, 2) == [1, 0]
    assert qudit_index_to_bits(0, 2) == [0, 0]
    assert bits_to_qudit_index([1, 1]) == 3


def test_encoding_inverse_pair():
    for j in range(8):
        assert bits_to_qudit_index(qudit_index_to_bits(j, 3)) == j


def test_encoding_rejects_out_of_range():
    with pytest.raises(EncodingError):
        qudit_index_to_bits(4, 2)
    with pytest.raises(EncodingError):
        bits_to_qudit_index([1, 2])


# ── Semiclassical readout ───────────────────────────────────


def test_semiclassical_fourier_state_is_deterministic():
    s = apply(qft(4), QuditState.basis(4, 1))
    for seed in range(20):
        assert semiclassical_iqft_measure(s, seed)[0] == 1
    zero = apply(qft(4), QuditState.basis(4, 0))
    assert semiclassical_iqft_measure(zero, 0)[0] == 0


def test_semiclassical_bit_record_is_lsb_first():
    s = apply(qft(8), QuditState.basis(8, 6))
    outcome, bits = semiclassical_iqft_measure(s, 5)
    assert outcome == 6
    assert bits == [0, 1, 1]


@pytest.mark.parametrize("d", [4, 8])
def test_semiclassical_distribution_matches_full_iqft(d, random_state):
    worst = 0.0
    for _ in range(100):
        s = random_state(d)
        full = measure_distribution(apply(inverse_qft(d), s))
        worst = max(worst, semiclassical_iqft_distribution(s).max_deviation(full))
    assert worst < 1e-9


def test_semiclassical_sampling_goodness_of_fit(random_state):
    s = random_state(8)
    shots = 100_000
    counts = np.bincount(semiclassical_iqft_sample(s, shots, rng_seed=42), minlength=8)
    p = measure_distribution(apply(inverse_qft(8), s)).probs
    sigma = np.sqrt(shots * p * (1 - p))
    assert np.all(np.abs(counts - shots * p) <= 4 * sigma + 1)


def test_semiclassical_sampling_is_seeded(random_state):
    s = random_state(4)
    a = semiclassical_iqft_sample(s, 1000, rng_seed=9)
    b = semiclassical_iqft_sample(s, 1000, rng_seed=9)
    np.testing.assert_array_equal(a, b)
    assert semiclassical_iqft_measure(s, 3) == semiclassical_iqft_measure(s, 3)


def test_semiclassical_needs_power_of_two():
    with pytest.raises(UnsupportedDimensionError):
        semiclassical_iqft_distribution(QuditState.basis(6, 0))
