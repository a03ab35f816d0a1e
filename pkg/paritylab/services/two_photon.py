"""Two-photon statistics and the d = 4 photonic hardware model.

A two-photon state is an amplitude matrix ``A[a, b]`` over (rail of photon 1,
rail of photon 2) together with the overlap ``beta`` of the photons' internal
wavepackets. Detection follows the partial-distinguishability rule

    P(p, q) = |A_pq|² + |A_qp|² + 2|β|²·Re(A_pq·conj(A_qp))    (p ≠ q)
    P(p, p) = (1 + |β|²)·|A_pp|²

so |β| = 1 is full bosonic interference and β = 0 is classical transfer.

The hardware layer realises the permutation unitaries of the d = 4 algorithm
as a removable-X / CNOT-submodule circuit and pushes the prepared Fourier
state through a density-matrix noise model before the feed-forward readout.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from pydantic import ValidationError

from ..config import settings
from ..errors import (
    DimensionMismatchError,
    InvalidSpecError,
    InvalidStateError,
    NetworkConfigError,
    SettingsError,
    UnsupportedDimensionError,
)
from ..models import CircuitSettings, CoincidenceRecord, NoiseParams, SubmoduleReport
from ..seeding import make_rng
from ..serialization import encode_complex
from .photonics import (
    JONES_VECTORS,
    PREPARATION_INPUT,
    ModeNetwork,
    Polarization,
    analyzer_probability,
    bd,
    compile_network,
    hwp,
    mach_zehnder_network,
    preparation_network,
    propagate,
    rail_index,
    single_photon,
)
from .qudit import (
    TOLERANCE,
    MeasurementDistribution,
    PermutationSpec,
    QuditState,
    Sign,
    UnitaryOp,
    product_state,
    qft,
    semiclassical_iqft_distribution,
)
from .tomography import DensityMatrix

logger = logging.getLogger(__name__)

HARDWARE_DIM = 4


# ── Two-photon states ───────────────────────────────────────


def _exchange_overlap(amps: np.ndarray) -> float:
    """Σ_ab A_ab·conj(A_ba); real for any square A."""
    return float(np.real(np.sum(amps * np.conj(amps.T))))


@dataclass(frozen=True, eq=False)
class TwoPhotonState:
    amps: np.ndarray
    beta: complex = 1.0

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex)
        if amps.ndim != 2 or amps.shape[0] != amps.shape[1]:
            raise InvalidStateError(f"Two-photon amplitudes must be square, got {amps.shape}")
        beta = complex(self.beta)
        if abs(beta) > 1 + TOLERANCE:
            raise InvalidStateError(f"|beta| must be at most 1, got {abs(beta):.6f}")
        norm = self._norm(amps, beta)
        if abs(norm - 1.0) > TOLERANCE:
            raise InvalidStateError(f"Two-photon state has total probability {norm:.12f}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)
        object.__setattr__(self, "beta", beta)

    @staticmethod
    def _norm(amps: np.ndarray, beta: complex) -> float:
        return float(np.sum(np.abs(amps) ** 2)) + abs(beta) ** 2 * _exchange_overlap(amps)

    @property
    def n_rails(self) -> int:
        return self.amps.shape[0]

    @property
    def indistinguishability(self) -> float:
        return abs(self.beta) ** 2

    def norm_factor(self) -> float:
        return self._norm(self.amps, self.beta)

    @classmethod
    def normalized(cls, amps, beta: complex = 1.0) -> TwoPhotonState:
        amps = np.asarray(amps, dtype=complex)
        norm = cls._norm(amps, complex(beta))
        if norm <= 0:
            raise InvalidStateError("Two-photon amplitudes have zero norm")
        return cls(amps / math.sqrt(norm), beta)

    @classmethod
    def product(cls, u, v, beta: complex = 1.0) -> TwoPhotonState:
        """Photon 1 in rail superposition ``u``, photon 2 in ``v``."""
        return cls.normalized(np.outer(np.asarray(u, dtype=complex), np.asarray(v, dtype=complex)), beta)

    @classmethod
    def from_rails(cls, n_rails: int, rail_a: int, rail_b: int, beta: complex = 1.0) -> TwoPhotonState:
        amps = np.zeros((n_rails, n_rails), dtype=complex)
        amps[rail_a, rail_b] = 1.0
        return cls.normalized(amps, beta)


def evolve_with(u: UnitaryOp, state: TwoPhotonState) -> TwoPhotonState:
    if u.dim != state.n_rails:
        raise DimensionMismatchError(f"Network acts on {u.dim} rails, state has {state.n_rails}")
    return TwoPhotonState(u.mat @ state.amps @ u.mat.T, state.beta)


def evolve_two_photons(net: ModeNetwork, state: TwoPhotonState) -> TwoPhotonState:
    """Each photon's rail vector transforms by the compiled network; beta is unchanged."""
    return evolve_with(compile_network(net), state)


def detection_probability(state: TwoPhotonState, outcome: tuple[int, int]) -> float:
    p, q = sorted(outcome)
    a = state.amps
    b2 = state.indistinguishability
    if p == q:
        return float((1 + b2) * abs(a[p, p]) ** 2)
    return float(
        abs(a[p, q]) ** 2 + abs(a[q, p]) ** 2 + 2 * b2 * np.real(a[p, q] * np.conj(a[q, p]))
    )


def outcome_probabilities(state: TwoPhotonState) -> dict[tuple[int, int], float]:
    """Probability of every unordered detector pair (p ≤ q)."""
    return {
        (p, q): detection_probability(state, (p, q))
        for p, q in itertools.combinations_with_replacement(range(state.n_rails), 2)
    }


def coincidence_amplitudes(state: TwoPhotonState, mode_a: int = 0, mode_b: int = 1) -> np.ndarray:
    """2×2 amplitudes for one photon in ``mode_a`` and one in ``mode_b``, fully interfering.

    Row = polarization found in ``mode_a``, column = polarization in ``mode_b``.
    """
    ra = slice(rail_index(mode_a, 0), rail_index(mode_a, 0) + 2)
    rb = slice(rail_index(mode_b, 0), rail_index(mode_b, 0) + 2)
    return state.amps[ra, rb] + state.amps[rb, ra].T


# ── Hong-Ou-Mandel ──────────────────────────────────────────


def hom_network() -> ModeNetwork:
    """Polarization beam splitter: HWP at 22.5° ahead of an H/V analyzer."""
    return ModeNetwork(1, (hwp(0, 22.5),))


HOM_INPUT_RAILS = (rail_index(0, Polarization.H), rail_index(0, Polarization.V))


def hom_coincidence(beta: complex) -> float:
    """Probability of one photon at each output port; equals (1 − |β|²)/2."""
    state = TwoPhotonState.from_rails(2, *HOM_INPUT_RAILS, beta=beta)
    return detection_probability(evolve_two_photons(hom_network(), state), HOM_INPUT_RAILS)


def gaussian_overlap(delay: float, beta0: float, coherence_time: float) -> float:
    if coherence_time <= 0:
        raise SettingsError(f"Coherence time must be positive, got {coherence_time}")
    return beta0 * math.exp(-((delay / coherence_time) ** 2))


def hom_dip_scan(
    delay_range: Sequence[float],
    coherence_time: float,
    beta0: float = 1.0,
) -> list[tuple[float, float]]:
    if not 0 <= beta0 <= 1:
        raise SettingsError(f"beta0 must lie in [0, 1], got {beta0}")
    return [
        (float(tau), hom_coincidence(gaussian_overlap(tau, beta0, coherence_time)))
        for tau in delay_range
    ]


def hom_visibility(beta0: float) -> float:
    """(P_∞ − P_0)/P_∞ with P_∞ the fully distinguishable coincidence rate."""
    far = hom_coincidence(0.0)
    return (far - hom_coincidence(beta0)) / far


# ── Permutation circuit ─────────────────────────────────────

CNOT_HWP2_DEG = 17.5
XX_HWP2_DEG = 45.0
REMOVABLE_HWP_DEG = 45.0

_P = Sign.POSITIVE
_N = Sign.NEGATIVE

PERMUTATION_SETTINGS: dict[tuple[int, Sign], CircuitSettings] = {
    (0, _P): CircuitSettings(hwp2_deg=45.0, hwp4_deg=45.0, hwp5_deg=45.0),
    (1, _P): CircuitSettings(hwp2_deg=17.5, hwp4_deg=None, hwp5_deg=45.0),
    (2, _P): CircuitSettings(hwp2_deg=45.0, hwp4_deg=None, hwp5_deg=45.0),
    (3, _P): CircuitSettings(hwp2_deg=17.5, hwp4_deg=45.0, hwp5_deg=45.0),
    (0, _N): CircuitSettings(hwp2_deg=17.5, hwp4_deg=None, hwp5_deg=None),
    (1, _N): CircuitSettings(hwp2_deg=45.0, hwp4_deg=45.0, hwp5_deg=None),
    (2, _N): CircuitSettings(hwp2_deg=17.5, hwp4_deg=45.0, hwp5_deg=None),
    (3, _N): CircuitSettings(hwp2_deg=45.0, hwp4_deg=None, hwp5_deg=None),
}

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)
XX_GATE = UnitaryOp(np.kron(PAULI_X, PAULI_X))
# Second qubit controls, first qubit is the target: |a, b⟩ → |a ⊕ b, b⟩
CNOT_GATE = UnitaryOp(np.eye(4, dtype=complex)[[0, 3, 2, 1]])


def _check_hardware(spec: PermutationSpec) -> None:
    if spec.dim != HARDWARE_DIM:
        raise UnsupportedDimensionError(f"The photonic layer realises d=4 only, got d={spec.dim}")


def permutation_settings(spec: PermutationSpec) -> CircuitSettings:
    _check_hardware(spec)
    return PERMUTATION_SETTINGS[(spec.m, spec.sign)]


def submodule_gate(hwp2_deg: float, cnot_angle_deg: Optional[float] = None) -> UnitaryOp:
    """Logical action of the BD submodule at its two declared HWP2 positions."""
    cnot_angle = settings.cnot_angle_deg if cnot_angle_deg is None else cnot_angle_deg
    if math.isclose(hwp2_deg, XX_HWP2_DEG, abs_tol=1e-9):
        return XX_GATE
    if math.isclose(hwp2_deg, cnot_angle, abs_tol=1e-9):
        return CNOT_GATE
    raise SettingsError(
        f"HWP2 at {hwp2_deg}° is neither the X⊗X position ({XX_HWP2_DEG}°) nor the CNOT position ({cnot_angle}°)"
    )


def _removable_x(angle: Optional[float], name: str) -> np.ndarray:
    if angle is None:
        return IDENTITY_2
    if not math.isclose(angle, REMOVABLE_HWP_DEG, abs_tol=1e-9):
        raise SettingsError(f"{name} must be absent or at {REMOVABLE_HWP_DEG}°, got {angle}°")
    return PAULI_X


def removable_gates(circuit: CircuitSettings) -> UnitaryOp:
    """HWP4 flips the first qubit, HWP5 the second."""
    return UnitaryOp(np.kron(_removable_x(circuit.hwp4_deg, "HWP4"), _removable_x(circuit.hwp5_deg, "HWP5")))


def logical_gate_for_settings(circuit: CircuitSettings, cnot_angle_deg: Optional[float] = None) -> UnitaryOp:
    return removable_gates(circuit) @ submodule_gate(circuit.hwp2_deg, cnot_angle_deg)


# ── Noise channels ──────────────────────────────────────────

FIRST_QUBIT_Z = np.diag([1, 1, -1, -1]).astype(complex)


def submodule_channel(rho: np.ndarray, gate: UnitaryOp, beta: float) -> np.ndarray:
    """|β|² of the ideal gate, the rest with interference removed (dephased in the gate basis)."""
    out = gate.mat @ rho @ gate.mat.conj().T
    b2 = abs(beta) ** 2
    return b2 * out + (1 - b2) * np.diag(np.diag(out))


def phase_damping(rho: np.ndarray, coherence: float) -> np.ndarray:
    """Shrink coherence between the two interferometer arms (first qubit) by ``coherence``."""
    return (1 + coherence) / 2 * rho + (1 - coherence) / 2 * (FIRST_QUBIT_Z @ rho @ FIRST_QUBIT_Z)


def readout_flip_matrix(flip: float) -> np.ndarray:
    single = np.array([[1 - flip, flip], [flip, 1 - flip]])
    return np.kron(single, single)


READOUT_LABEL_PRESETS = {
    "encoding": ("HH", "HV", "VH", "VV"),
    # Negative-parity outcome labelled VH
    "figure": ("HH", "HV", "VV", "VH"),
}


def readout_labels(preset: Optional[str] = None) -> tuple[str, ...]:
    """Detector label of each qudit outcome index 0..3."""
    preset = (preset or settings.readout_labels).lower()
    try:
        return READOUT_LABEL_PRESETS[preset]
    except KeyError:
        raise SettingsError(
            f"Unknown readout label preset {preset!r} (choose from {sorted(READOUT_LABEL_PRESETS)})"
        ) from None


# ── Pipeline ────────────────────────────────────────────────


@lru_cache(maxsize=1)
def prepared_logical_state() -> QuditState:
    """Two-qubit state leaving the preparation stage, one photon per arm."""
    net = preparation_network()
    rails = [rail_index(mode, Polarization[pol]) for pol, mode in PREPARATION_INPUT]
    state = evolve_two_photons(net, TwoPhotonState.from_rails(net.n_rails, *rails))
    return QuditState(coincidence_amplitudes(state).reshape(-1))


def check_preparation(tol: float = 1e-12) -> bool:
    """Prepared product state equals qft(4)|1⟩ under the binary encoding."""
    target = qft(HARDWARE_DIM).mat[:, 1]
    return bool(np.max(np.abs(prepared_logical_state().amps - target)) <= tol)


def output_density_matrix(
    spec: PermutationSpec,
    noise: NoiseParams,
    cnot_angle_deg: Optional[float] = None,
    circuit: Optional[CircuitSettings] = None,
) -> DensityMatrix:
    """Two-qubit state reaching the readout stage for one permutation.

    ``circuit`` overrides the settings looked up for ``spec``.
    """
    circuit = circuit or permutation_settings(spec)
    psi = prepared_logical_state().amps
    rho = np.outer(psi, psi.conj())
    rho = submodule_channel(rho, submodule_gate(circuit.hwp2_deg, cnot_angle_deg), noise.beta)
    rho = phase_damping(rho, noise.mz_dephasing)
    x = removable_gates(circuit).mat
    rho = x @ rho @ x.conj().T
    return DensityMatrix((rho + rho.conj().T) / 2)


def semiclassical_mixed_distribution(rho: DensityMatrix) -> np.ndarray:
    """Feed-forward readout of a mixed state: eigen-ensemble average."""
    weights, vectors = np.linalg.eigh(rho.mat)
    probs = np.zeros(rho.dim)
    for w, vec in zip(weights, vectors.T):
        if w <= TOLERANCE * 1e-3:
            continue
        probs += w * semiclassical_iqft_distribution(QuditState.normalized(vec)).probs
    return probs / probs.sum()


def photonic_outcome_distribution(
    spec: PermutationSpec,
    noise: NoiseParams,
    cnot_angle_deg: Optional[float] = None,
    circuit: Optional[CircuitSettings] = None,
) -> MeasurementDistribution:
    """Exact per-outcome probabilities of the noisy pipeline, in qudit index order."""
    probs = semiclassical_mixed_distribution(output_density_matrix(spec, noise, cnot_angle_deg, circuit))
    if noise.readout_flip:
        probs = readout_flip_matrix(noise.readout_flip) @ probs
    return MeasurementDistribution(probs)


def run_photonic_algorithm(
    spec: PermutationSpec,
    noise: NoiseParams,
    shots: int,
    rng_seed: int,
    labels: Optional[Sequence[str]] = None,
    circuit: Optional[CircuitSettings] = None,
) -> CoincidenceRecord:
    if shots < 1:
        raise InvalidSpecError(f"shots must be >= 1, got {shots}")
    labels = tuple(labels or readout_labels())
    dist = photonic_outcome_distribution(spec, noise, circuit=circuit)
    sample = make_rng(rng_seed).multinomial(shots, dist.probs / dist.probs.sum())
    counts = {label: int(n) for label, n in zip(labels, sample)}
    logger.debug("Photonic run %s: %s", spec.label, counts)
    return CoincidenceRecord(shots=shots, seed=rng_seed, **counts)


def record_distribution(record: CoincidenceRecord, labels: Optional[Sequence[str]] = None) -> MeasurementDistribution:
    labels = tuple(labels or readout_labels())
    counts = record.counts()
    return MeasurementDistribution.from_counts([counts[label] for label in labels])


# ── Characterisation ────────────────────────────────────────

BELL_TARGET = QuditState(np.array([0, 1, 1, 0], dtype=complex) / math.sqrt(2))


def bell_input_state() -> QuditState:
    """Target photon V, control photon (H + V)/√2."""
    return product_state(JONES_VECTORS["V"], JONES_VECTORS["D"])


def cnot_bell_test(noise: NoiseParams, cnot_angle_deg: Optional[float] = None) -> DensityMatrix:
    psi = bell_input_state().amps
    angle = settings.cnot_angle_deg if cnot_angle_deg is None else cnot_angle_deg
    gate = submodule_gate(angle, angle)
    rho = submodule_channel(np.outer(psi, psi.conj()), gate, noise.beta)
    rho = phase_damping(rho, noise.mz_dephasing)
    return DensityMatrix((rho + rho.conj().T) / 2)


def mach_zehnder_fringe(phase_deg: float, mz_dephasing: float = 1.0, analyzer: str = "D") -> float:
    """Analyzer transmission behind the BD interferometer, diagonal input photon.

    The two arms interfere with weight ``mz_dephasing`` and add incoherently
    otherwise.
    """
    net = mach_zehnder_network(phase_deg)
    before, after = net.split(1)
    mid = propagate(before, single_photon(net, 0, JONES_VECTORS["D"]))
    u_after = compile_network(after).mat
    coherent = analyzer_probability(u_after @ mid, analyzer)
    incoherent = 0.0
    for mode in range(net.n_spatial):
        arm = np.zeros_like(mid)
        lo = rail_index(mode, 0)
        arm[lo:lo + 2] = mid[lo:lo + 2]
        incoherent += analyzer_probability(u_after @ arm, analyzer)
    return mz_dephasing * coherent + (1 - mz_dephasing) * incoherent


def mach_zehnder_visibility(mz_dephasing: float = 1.0, step_deg: float = 5.0) -> float:
    fringe = [mach_zehnder_fringe(p, mz_dephasing) for p in np.arange(0.0, 360.0 + step_deg / 2, step_deg)]
    hi, lo = max(fringe), min(fringe)
    return (hi - lo) / (hi + lo)


def calibrate_noise(
    hom_visibility: Optional[float] = None,
    mz_visibility: Optional[float] = None,
    readout_flip: float = 0.0,
) -> NoiseParams:
    """Noise parameters reproducing the measured HOM and interferometer visibilities."""
    hom = settings.hom_visibility if hom_visibility is None else hom_visibility
    mz = settings.mz_visibility if mz_visibility is None else mz_visibility
    if not 0 <= hom <= 1:
        raise SettingsError(f"HOM visibility must lie in [0, 1], got {hom}")
    try:
        noise = NoiseParams(beta=math.sqrt(hom), mz_dephasing=mz, readout_flip=readout_flip)
    except ValidationError as e:
        raise SettingsError(f"Invalid noise parameters: {e.errors()[0]['msg']}") from e
    logger.info("Calibrated noise: beta=%.6f mz_dephasing=%.5f readout_flip=%.4f",
                noise.beta, noise.mz_dephasing, noise.readout_flip)
    return noise


# ── Exploratory submodule ───────────────────────────────────


def submodule_network(hwp2_deg: float) -> ModeNetwork:
    """BD – HWP2 on the shared arm – BD; photon 1 enters mode 0, photon 2 mode 1."""
    return ModeNetwork(2, (bd(0), hwp(1, hwp2_deg), bd(0)))


def postselected_map(net: ModeNetwork) -> np.ndarray:
    """Coincidence map of a network with photon 1 entering mode 0 and photon 2 mode 1.

    Column ``2·i1 + i2`` holds the amplitudes (mode 0 polarization, mode 1
    polarization) for input polarizations (i1, i2); photons are fully
    indistinguishable.
    """
    if net.n_spatial < 2:
        raise NetworkConfigError(f"Two-photon submodule needs at least 2 spatial modes, got {net.n_spatial}")
    u = compile_network(net)
    matrix = np.zeros((4, 4), dtype=complex)
    for i1, i2 in itertools.product((0, 1), repeat=2):
        state = TwoPhotonState.from_rails(net.n_rails, rail_index(0, i1), rail_index(1, i2))
        matrix[:, 2 * i1 + i2] = coincidence_amplitudes(evolve_with(u, state)).reshape(-1)
    return matrix


def explore_submodule(hwp2_deg: Optional[float] = None, network: Optional[ModeNetwork] = None) -> SubmoduleReport:
    """Report the post-selected map at an arbitrary HWP2 angle, or of a custom network.

    Overlaps are |tr(G†M)|² / (4·tr(M†M)), equal to 1 iff the map is
    proportional to G.
    """
    if network is None:
        hwp2_deg = settings.cnot_angle_deg if hwp2_deg is None else hwp2_deg
        network = submodule_network(hwp2_deg)
    matrix = postselected_map(network)

    norm = float(np.real(np.trace(matrix.conj().T @ matrix)))

    def overlap(gate: UnitaryOp) -> float:
        if norm == 0:
            return 0.0
        return float(abs(np.trace(gate.mat.conj().T @ matrix)) ** 2 / (4 * norm))

    return SubmoduleReport(
        hwp2_deg=hwp2_deg,
        matrix=encode_complex(matrix),
        postselection_probability=[float(p) for p in np.sum(np.abs(matrix) ** 2, axis=0)],
        cnot_overlap=overlap(CNOT_GATE),
        xx_overlap=overlap(XX_GATE),
    )
