"""Single-qudit linear algebra.

Dense, exact complex arithmetic for one d-level system: states, unitaries, the
quantum Fourier transform, the cyclic permutation operators f_m^±, Born-rule
readout, the binary two-qubit encoding used by the d = 4 hardware layer, and
the semiclassical (measure and feed-forward) inverse Fourier readout.

Conventions shared by every module:

- ``qft(d)[k, j] = exp(+2πi·jk/d)/√d``, so ``qft(d)|1⟩`` is the phase ramp
  Σ_k e^{2πik/d}|k⟩/√d.
- Qudit index j ↔ bits b_{n-1} … b_0 with the FIRST qubit the most significant
  bit (|2⟩ = |1⟩⊗|0⟩).
- States are compared up to global phase unless ``equal_exactly`` is used.

All value types are immutable; every function here is pure.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from ..errors import (
    DimensionMismatchError,
    EncodingError,
    InvalidDimensionError,
    InvalidSpecError,
    InvalidStateError,
    ParityUndefinedError,
    UnsupportedDimensionError,
)
from ..seeding import make_rng

logger = logging.getLogger(__name__)

TOLERANCE = 1e-9
# Entries this far below zero are rounding noise and are clamped on output
NEGATIVE_PROB_SLACK = 1e-12


def _check_dim(d) -> int:
    if isinstance(d, bool) or not isinstance(d, (int, np.integer)):
        raise InvalidDimensionError(f"Dimension must be an integer, got {d!r}")
    if d < 2:
        raise InvalidDimensionError(f"Dimension must be at least 2, got {d}")
    return int(d)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


# ── Value types ─────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class QuditState:
    """Normalised amplitude vector of a d-level system."""

    amps: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        _check_dim(amps.size)
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > TOLERANCE:
            raise InvalidStateError(f"State norm is {norm:.12f}, expected 1")
        object.__setattr__(self, "amps", _frozen(amps))

    @property
    def dim(self) -> int:
        return self.amps.size

    @classmethod
    def basis(cls, d: int, j: int) -> QuditState:
        d = _check_dim(d)
        if not 0 <= j < d:
            raise InvalidStateError(f"Basis index {j} outside [0, {d - 1}]")
        amps = np.zeros(d, dtype=complex)
        amps[j] = 1.0
        return cls(amps)

    @classmethod
    def normalized(cls, amps) -> QuditState:
        """Build a state from arbitrary non-zero amplitudes by rescaling."""
        amps = np.asarray(amps, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise InvalidStateError("Cannot normalise the zero vector")
        return cls(amps / norm)

    def with_phase(self, phase: complex) -> QuditState:
        """Multiply by a unit-modulus scalar."""
        return QuditState(self.amps * phase)


@dataclass(frozen=True, eq=False)
class UnitaryOp:
    mat: np.ndarray

    def __post_init__(self):
        mat = np.array(self.mat, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise InvalidDimensionError(f"Unitary must be square, got shape {mat.shape}")
        _check_dim(mat.shape[0])
        defect = np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])))
        if defect > TOLERANCE:
            raise InvalidStateError(f"Matrix is not unitary (max defect {defect:.3e})")
        object.__setattr__(self, "mat", _frozen(mat))

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @classmethod
    def identity(cls, d: int) -> UnitaryOp:
        return cls(np.eye(_check_dim(d), dtype=complex))

    def dagger(self) -> UnitaryOp:
        return UnitaryOp(self.mat.conj().T)

    def compose(self, other: UnitaryOp) -> UnitaryOp:
        """``self · other`` (``other`` acts first)."""
        if other.dim != self.dim:
            raise DimensionMismatchError(f"Cannot compose {self.dim}×{self.dim} with {other.dim}×{other.dim}")
        return UnitaryOp(self.mat @ other.mat)

    def power(self, k: int) -> UnitaryOp:
        return UnitaryOp(np.linalg.matrix_power(self.mat, k))

    def __matmul__(self, other):
        if isinstance(other, UnitaryOp):
            return self.compose(other)
        if isinstance(other, QuditState):
            return apply(self, other)
        return NotImplemented


class Sign(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"

    @classmethod
    def parse(cls, value: Union[str, Sign]) -> Sign:
        if isinstance(value, Sign):
            return value
        aliases = {"+": cls.POSITIVE, "pos": cls.POSITIVE, "positive": cls.POSITIVE,
                   "-": cls.NEGATIVE, "neg": cls.NEGATIVE, "negative": cls.NEGATIVE}
        try:
            return aliases[str(value).strip().lower()]
        except KeyError:
            raise InvalidSpecError(f"Unknown sign {value!r} (use + or -)") from None

    @property
    def factor(self) -> int:
        return 1 if self is Sign.POSITIVE else -1

    @property
    def symbol(self) -> str:
        return "+" if self is Sign.POSITIVE else "-"


@dataclass(frozen=True)
class PermutationSpec:
    """Identifies the black-box permutation f_m^±(x) = (m ± x) mod d."""

    m: int
    sign: Sign
    dim: int

    def __post_init__(self):
        d = _check_dim(self.dim)
        if d == 2:
            raise ParityUndefinedError(
                "Parity is undefined for d=2: f_m^+ and f_m^- coincide"
            )
        if not 0 <= self.m < d:
            raise InvalidSpecError(f"m={self.m} outside [0, {d - 1}]")
        object.__setattr__(self, "sign", Sign.parse(self.sign))

    def evaluate(self, x: int) -> int:
        return (self.m + self.sign.factor * x) % self.dim

    @property
    def label(self) -> str:
        return f"f_{self.m}^{self.sign.symbol}"

    @classmethod
    def all_specs(cls, d: int) -> list[PermutationSpec]:
        """All 2d specs: positive m = 0..d-1, then negative m = 0..d-1."""
        return [cls(m, sign, d) for sign in (Sign.POSITIVE, Sign.NEGATIVE) for m in range(d)]


@dataclass(frozen=True, eq=False)
class MeasurementDistribution:
    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float).reshape(-1)
        _check_dim(probs.size)
        if np.any(probs < -NEGATIVE_PROB_SLACK):
            raise InvalidStateError(f"Negative probability {probs.min():.3e}")
        probs = np.clip(probs, 0.0, None)
        total = float(probs.sum())
        if abs(total - 1.0) > TOLERANCE:
            raise InvalidStateError(f"Probabilities sum to {total:.12f}, expected 1")
        object.__setattr__(self, "probs", _frozen(probs))

    @property
    def dim(self) -> int:
        return self.probs.size

    @classmethod
    def from_counts(cls, counts) -> MeasurementDistribution:
        counts = np.asarray(counts, dtype=float)
        total = counts.sum()
        if total <= 0:
            raise InvalidStateError("No counts to normalise")
        return cls(counts / total)

    def max_deviation(self, other: MeasurementDistribution) -> float:
        if other.dim != self.dim:
            raise DimensionMismatchError(f"Distributions of size {self.dim} and {other.dim}")
        return float(np.max(np.abs(self.probs - other.probs)))


# ── Operators ───────────────────────────────────────────────


def qft(d: int) -> UnitaryOp:
    d = _check_dim(d)
    k = np.arange(d)
    return UnitaryOp(np.exp(2j * np.pi * np.outer(k, k) / d) / math.sqrt(d))


def inverse_qft(d: int) -> UnitaryOp:
    return qft(d).dagger()


def permutation_unitary(spec: PermutationSpec) -> UnitaryOp:
    """Column j carries a single 1 at row f(j)."""
    d = spec.dim
    mat = np.zeros((d, d), dtype=complex)
    for j in range(d):
        mat[spec.evaluate(j), j] = 1.0
    return UnitaryOp(mat)


def apply(u: UnitaryOp, s: QuditState) -> QuditState:
    if u.dim != s.dim:
        raise DimensionMismatchError(f"Operator of dimension {u.dim} applied to state of dimension {s.dim}")
    return QuditState(u.mat @ s.amps)


def measure_distribution(s: QuditState) -> MeasurementDistribution:
    return MeasurementDistribution(np.abs(s.amps) ** 2)


# ── Comparisons ─────────────────────────────────────────────


def _as_array(x) -> np.ndarray:
    if isinstance(x, QuditState):
        return x.amps
    if isinstance(x, UnitaryOp):
        return x.mat
    return np.asarray(x, dtype=complex)


def equal_exactly(a, b, tol: float = TOLERANCE) -> bool:
    """Entrywise equality of amplitudes/matrices, phases included."""
    a, b = _as_array(a), _as_array(b)
    return a.shape == b.shape and bool(np.max(np.abs(a - b)) <= tol)


def equal_up_to_global_phase(a, b, tol: float = TOLERANCE) -> bool:
    a, b = _as_array(a), _as_array(b)
    if a.shape != b.shape:
        return False
    overlap = np.vdot(a.ravel(), b.ravel())
    if abs(overlap) < tol:
        return bool(np.max(np.abs(a)) <= tol and np.max(np.abs(b)) <= tol)
    return bool(np.max(np.abs(a * (overlap / abs(overlap)) - b)) <= tol)


# ── Binary encoding ─────────────────────────────────────────


def qudit_index_to_bits(j: int, n_qubits: int) -> list[int]:
    """Big-endian bits of ``j``: the first qubit is the most significant."""
    if n_qubits < 1:
        raise EncodingError(f"Need at least one qubit, got {n_qubits}")
    if not 0 <= j < 2 ** n_qubits:
        raise EncodingError(f"Index {j} not representable on {n_qubits} qubits")
    return [(j >> (n_qubits - 1 - q)) & 1 for q in range(n_qubits)]


def bits_to_qudit_index(bits) -> int:
    bits = list(bits)
    if not bits:
        raise EncodingError("Empty bit list")
    index = 0
    for b in bits:
        if b not in (0, 1):
            raise EncodingError(f"Bits must be 0 or 1, got {b!r}")
        index = (index << 1) | int(b)
    return index


def product_state(*qubits) -> QuditState:
    """Tensor product of single-qubit vectors, first factor most significant."""
    amps = np.ones(1, dtype=complex)
    for q in qubits:
        amps = np.kron(amps, np.asarray(q, dtype=complex))
    return QuditState(amps)


# ── Semiclassical inverse Fourier readout ───────────────────


def _qubit_count(d: int) -> int:
    d = _check_dim(d)
    n = d.bit_length() - 1
    if 1 << n != d:
        raise UnsupportedDimensionError(f"Semiclassical readout needs d = 2^n, got d={d}")
    return n


def _feed_forward_tree(s: QuditState) -> tuple[list[np.ndarray], np.ndarray]:
    """Run the measure-and-rotate protocol over every branch.

    Stage l acts on the qubit of weight 2^(n-1-l) (most significant first):
    a phase exp(-2πi·Y/2^(l+1)) on its |1⟩ component, where Y holds the
    earlier outcomes y_0..y_(l-1) as an integer, then a Hadamard, then a
    computational-basis measurement whose result is outcome bit y_l.

    Returns ``(cond, leaves)``: ``cond[l][Y]`` is P(y_l = 1 | earlier outcomes Y)
    and ``leaves[y]`` is the joint probability of the full outcome y.
    """
    n = _qubit_count(s.dim)
    branches = {0: s.amps.reshape((2,) * n)}
    cond = []
    for level in range(n):
        p_one = np.zeros(1 << level)
        nxt = {}
        for prefix, tensor in branches.items():
            zero = tensor[0]
            one = tensor[1] * np.exp(-2j * np.pi * prefix / (1 << (level + 1)))
            t0 = (zero + one) / math.sqrt(2)
            t1 = (zero - one) / math.sqrt(2)
            w0 = float(np.sum(np.abs(t0) ** 2))
            w1 = float(np.sum(np.abs(t1) ** 2))
            p_one[prefix] = w1 / (w0 + w1) if w0 + w1 > 0 else 0.0
            nxt[prefix] = t0
            nxt[prefix | (1 << level)] = t1
        cond.append(p_one)
        branches = nxt
    leaves = np.array([float(np.sum(np.abs(branches[y]) ** 2)) for y in range(s.dim)])
    return cond, leaves


def semiclassical_iqft_distribution(s: QuditState) -> MeasurementDistribution:
    """Exact outcome distribution of the feed-forward readout."""
    _, leaves = _feed_forward_tree(s)
    return MeasurementDistribution(leaves)


def semiclassical_iqft_measure(s: QuditState, rng_seed: int) -> tuple[int, list[int]]:
    """Sample one outcome of the feed-forward inverse-Fourier readout.

    Returns ``(outcome, bit_record)``; ``bit_record`` lists the stage results in
    measurement order, i.e. least significant outcome bit first.
    """
    cond, _ = _feed_forward_tree(s)
    rng = make_rng(rng_seed)
    outcome = 0
    bits = []
    for level, p_one in enumerate(cond):
        bit = int(rng.random() < p_one[outcome])
        bits.append(bit)
        outcome |= bit << level
    return outcome, bits


def semiclassical_iqft_sample(s: QuditState, shots: int, rng_seed: int) -> np.ndarray:
    """``shots`` independent runs of the feed-forward readout, vectorised."""
    if shots < 1:
        raise InvalidSpecError(f"shots must be >= 1, got {shots}")
    cond, _ = _feed_forward_tree(s)
    rng = make_rng(rng_seed)
    outcomes = np.zeros(shots, dtype=np.int64)
    for level, p_one in enumerate(cond):
        bits = rng.random(shots) < p_one[outcomes]
        outcomes |= bits.astype(np.int64) << level
    return outcomes
