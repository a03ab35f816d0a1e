"""Two-qubit polarization state tomography.

Each measurement setting fixes one analyzer per photon, named by a projector
from {H, V, D, A, R, L}; a setting records coincidences for the four outcomes
(projector or its orthogonal partner, per photon). Reconstruction is either a
least-squares linear inversion (possibly non-physical) or a maximum-likelihood
estimate by the diluted RρR iteration, which stays physical at every step.

Fidelity against a pure target uses the squared convention ⟨ψ|ρ|ψ⟩.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import sqrtm

from ..errors import InvalidStateError, ParseError, TomographyError
from ..models import MLEDiagnostics
from ..seeding import make_rng
from .photonics import JONES_VECTORS
from .qudit import QuditState

logger = logging.getLogger(__name__)

DM_TOLERANCE = 1e-9
MLE_TOLERANCE = 1e-10
MLE_MAX_ITERATIONS = 10_000
DILUTION_FACTOR = 0.5
# Smallest dilution tried before a step counts as stagnated
MIN_STEP = 1e-8

ORTHOGONAL = {"H": "V", "V": "H", "D": "A", "A": "D", "R": "L", "L": "R"}
PROJECTOR_LABELS = ("H", "V", "D", "A", "R", "L")
MINIMAL_LABELS = ("H", "V", "D", "R")


# ── Density matrices ────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    mat: np.ndarray
    # Linear inversion may legitimately return negative eigenvalues
    check_positive: bool = field(default=True, repr=False)

    def __post_init__(self):
        mat = np.array(self.mat, dtype=complex)
        if mat.shape != (4, 4):
            raise InvalidStateError(f"Two-qubit density matrix must be 4×4, got {mat.shape}")
        if np.max(np.abs(mat - mat.conj().T)) > DM_TOLERANCE:
            raise InvalidStateError("Density matrix is not Hermitian")
        if abs(np.trace(mat) - 1) > DM_TOLERANCE:
            raise InvalidStateError(f"Density matrix trace is {np.trace(mat).real:.12f}")
        if self.check_positive and np.linalg.eigvalsh(mat).min() < -DM_TOLERANCE:
            raise InvalidStateError("Density matrix has a negative eigenvalue")
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)

    @classmethod
    def from_state(cls, psi) -> DensityMatrix:
        vec = psi.amps if isinstance(psi, QuditState) else np.asarray(psi, dtype=complex)
        return cls(np.outer(vec, vec.conj()))

    @classmethod
    def maximally_mixed(cls) -> DensityMatrix:
        return cls(np.eye(4) / 4)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.mat)

    def is_physical(self, tol: float = DM_TOLERANCE) -> bool:
        return bool(self.eigenvalues().min() >= -tol)


def fidelity(rho: DensityMatrix, target) -> float:
    """⟨ψ|ρ|ψ⟩ for a pure target (squared-fidelity convention)."""
    psi = target.amps if isinstance(target, QuditState) else np.asarray(target, dtype=complex)
    value = float(np.real(np.vdot(psi, rho.mat @ psi)))
    return min(max(value, 0.0), 1.0)


def state_fidelity(a: DensityMatrix, b: DensityMatrix) -> float:
    """Uhlmann fidelity (tr√(√a·b·√a))², squared convention like ``fidelity``."""
    root = sqrtm(a.mat)
    value = float(np.real(np.trace(sqrtm(root @ b.mat @ root))) ** 2)
    return min(max(value, 0.0), 1.0)


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(a.mat - b.mat))))


def purity(rho: DensityMatrix) -> float:
    return float(np.real(np.trace(rho.mat @ rho.mat)))


def project_to_physical(mat: np.ndarray) -> np.ndarray:
    """Clip negative eigenvalues and renormalise; falls back to I/4."""
    herm = (mat + mat.conj().T) / 2
    w, v = np.linalg.eigh(herm)
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        return np.eye(4, dtype=complex) / 4
    w /= w.sum()
    return (v * w) @ v.conj().T


# ── Settings ────────────────────────────────────────────────


@dataclass(frozen=True)
class TomographySetting:
    first: str
    second: str

    def __post_init__(self):
        for label in (self.first, self.second):
            if label not in ORTHOGONAL:
                raise TomographyError(f"Unknown projector {label!r}")

    def outcomes(self) -> list[str]:
        a, b = self.first, self.second
        return [x + y for x in (a, ORTHOGONAL[a]) for y in (b, ORTHOGONAL[b])]

    @property
    def key(self) -> str:
        return self.first + self.second


def outcome_projector(outcome: str) -> np.ndarray:
    vec = np.kron(JONES_VECTORS[outcome[0]], JONES_VECTORS[outcome[1]])
    return np.outer(vec, vec.conj())


def pauli_settings() -> tuple[TomographySetting, ...]:
    """The 36-setting overcomplete set (all projector pairs)."""
    return tuple(TomographySetting(a, b) for a, b in itertools.product(PROJECTOR_LABELS, repeat=2))


def minimal_settings() -> tuple[TomographySetting, ...]:
    return tuple(TomographySetting(a, b) for a, b in itertools.product(MINIMAL_LABELS, repeat=2))


def _pauli_basis() -> np.ndarray:
    paulis = [
        np.eye(2, dtype=complex),
        np.array([[0, 1], [1, 0]], dtype=complex),
        np.array([[0, -1j], [1j, 0]], dtype=complex),
        np.array([[1, 0], [0, -1]], dtype=complex),
    ]
    return np.array([np.kron(a, b) for a, b in itertools.product(paulis, repeat=2)])


PAULI_BASIS = _pauli_basis()


def _design_matrix(projectors: np.ndarray) -> np.ndarray:
    """Row o, column k: tr(P_o σ_k)/4, so that p = A·c for ρ = Σ c_k σ_k/4."""
    return np.real(np.einsum("oij,kji->ok", projectors, PAULI_BASIS)) / 4


def check_informationally_complete(settings: Sequence[TomographySetting]) -> None:
    projectors = np.array([outcome_projector(o) for s in settings for o in s.outcomes()])
    rank = np.linalg.matrix_rank(_design_matrix(projectors))
    if rank < 16:
        raise TomographyError(f"Settings are not informationally complete (rank {rank} < 16)")


# ── Count tables ────────────────────────────────────────────


@dataclass(frozen=True)
class SettingCounts:
    setting: TomographySetting
    counts: dict

    def total(self) -> float:
        return float(sum(self.counts.values()))


@dataclass(frozen=True)
class CountTable:
    entries: tuple[SettingCounts, ...]

    @property
    def settings(self) -> tuple[TomographySetting, ...]:
        return tuple(e.setting for e in self.entries)

    def flatten(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(projectors, counts, setting totals repeated per outcome)."""
        projectors, counts, totals = [], [], []
        for entry in self.entries:
            total = entry.total()
            for outcome in entry.setting.outcomes():
                projectors.append(outcome_projector(outcome))
                counts.append(float(entry.counts.get(outcome, 0)))
                totals.append(total)
        return np.array(projectors), np.array(counts), np.array(totals)

    def to_json(self) -> list[dict]:
        return [
            {"setting": [e.setting.first, e.setting.second], "counts": dict(e.counts)}
            for e in self.entries
        ]

    @classmethod
    def from_json(cls, data) -> CountTable:
        if not isinstance(data, list) or not data:
            raise ParseError("Counts file must be a non-empty JSON list")
        entries = []
        for i, item in enumerate(data):
            try:
                first, second = item["setting"]
                setting = TomographySetting(str(first), str(second))
                raw = item["counts"]
                if not isinstance(raw, dict):
                    raise TypeError("'counts' must be an object")
                counts = {str(k): float(v) for k, v in raw.items()}
            except TomographyError as e:
                raise ParseError(f"Entry {i}: {e}") from e
            except (KeyError, TypeError, ValueError) as e:
                raise ParseError(f"Entry {i}: malformed setting/counts ({e})") from e
            unknown = set(counts) - set(setting.outcomes())
            if unknown:
                raise ParseError(f"Entry {i}: outcomes {sorted(unknown)} do not belong to setting {setting.key}")
            if any(v < 0 for v in counts.values()):
                raise ParseError(f"Entry {i}: negative counts")
            entries.append(SettingCounts(setting, counts))
        return cls(tuple(entries))


def _born_probabilities(rho: DensityMatrix, setting: TomographySetting) -> np.ndarray:
    probs = np.array([np.real(np.trace(outcome_projector(o) @ rho.mat)) for o in setting.outcomes()])
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def simulate_counts(
    rho: DensityMatrix,
    settings: Sequence[TomographySetting],
    shots_per_setting: int,
    rng_seed: int,
) -> CountTable:
    if shots_per_setting < 1:
        raise TomographyError(f"shots_per_setting must be >= 1, got {shots_per_setting}")
    rng = make_rng(rng_seed)
    entries = []
    for setting in settings:
        sample = rng.multinomial(shots_per_setting, _born_probabilities(rho, setting))
        entries.append(SettingCounts(setting, {o: int(n) for o, n in zip(setting.outcomes(), sample)}))
    return CountTable(tuple(entries))


def exact_counts(rho: DensityMatrix, settings: Sequence[TomographySetting], scale: float = 1.0) -> CountTable:
    """Infinite-shot data: Born probabilities times ``scale`` as fractional counts."""
    entries = []
    for setting in settings:
        probs = _born_probabilities(rho, setting)
        probs[probs < 1e-14] = 0.0
        entries.append(SettingCounts(setting, {o: float(p * scale) for o, p in zip(setting.outcomes(), probs)}))
    return CountTable(tuple(entries))


# ── Reconstruction ──────────────────────────────────────────


def _frequencies(counts: CountTable) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    projectors, n, totals = counts.flatten()
    if n.sum() <= 0:
        raise TomographyError("Count table is empty")
    check_informationally_complete(counts.settings)
    freqs = np.divide(n, totals, out=np.zeros_like(n), where=totals > 0)
    return projectors, n, freqs


def linear_inversion(counts: CountTable) -> DensityMatrix:
    """Least-squares solution of tr(P_o ρ) = f_o; may be non-physical."""
    projectors, _, freqs = _frequencies(counts)
    coeffs, *_ = np.linalg.lstsq(_design_matrix(projectors), freqs, rcond=None)
    mat = np.einsum("k,kij->ij", coeffs, PAULI_BASIS) / 4
    mat = (mat + mat.conj().T) / 2
    return DensityMatrix(mat / np.trace(mat).real, check_positive=False)


@dataclass(frozen=True)
class Reconstruction:
    rho: DensityMatrix
    diagnostics: MLEDiagnostics


def _log_likelihood(projectors: np.ndarray, weights: np.ndarray, rho: np.ndarray) -> float:
    probs = np.real(np.einsum("oij,ji->o", projectors, rho))
    mask = weights > 0
    return float(np.sum(weights[mask] * np.log(np.maximum(probs[mask], 1e-300))))


def mle_reconstruct(
    counts: CountTable,
    tol: float = MLE_TOLERANCE,
    max_iter: int = MLE_MAX_ITERATIONS,
    initial: Optional[DensityMatrix] = None,
) -> Reconstruction:
    """Maximum-likelihood state by the diluted RρR iteration.

    The log-likelihood is normalised per count. Each step first tries the full
    RρR update and halves the dilution until the likelihood does not decrease;
    iteration stops once the improvement falls below ``tol``.
    """
    projectors, n, _ = _frequencies(counts)
    weights = n / n.sum()
    identity = np.eye(4, dtype=complex)

    if initial is not None:
        rho = np.array(initial.mat, dtype=complex)
    else:
        rho = project_to_physical(linear_inversion(counts).mat)
    probs = np.real(np.einsum("oij,ji->o", projectors, rho))
    if np.any(probs[weights > 0] <= 1e-12):
        # Observed outcome with zero model probability: move off the boundary
        rho = (1 - 1e-6) * rho + 1e-6 * identity / 4

    loglik = _log_likelihood(projectors, weights, rho)
    trace = [loglik]
    dilutions = 0
    converged = False
    iterations = 0

    for iterations in range(1, max_iter + 1):
        probs = np.real(np.einsum("oij,ji->o", projectors, rho))
        ratio = np.divide(weights, probs, out=np.zeros_like(weights), where=weights > 0)
        r_op = np.einsum("o,oij->ij", ratio, projectors)

        step = 1.0
        while True:
            t_op = (1 - step) * identity + step * r_op
            candidate = t_op @ rho @ t_op.conj().T
            candidate /= np.trace(candidate).real
            cand_loglik = _log_likelihood(projectors, weights, candidate)
            if cand_loglik >= loglik:
                break
            step *= DILUTION_FACTOR
            dilutions += 1
            if step < MIN_STEP:
                candidate, cand_loglik = rho, loglik
                break

        improvement = cand_loglik - loglik
        assert improvement >= 0, "log-likelihood decreased"
        rho = (candidate + candidate.conj().T) / 2
        loglik = cand_loglik
        trace.append(loglik)
        logger.debug("RρR iteration %d: loglik=%.12f step=%.3g", iterations, loglik, step)
        if improvement < tol:
            converged = True
            break

    if not converged:
        logger.warning("MLE did not converge after %d iterations (loglik=%.10f)", iterations, loglik)

    diagnostics = MLEDiagnostics(
        iterations=iterations,
        converged=converged,
        log_likelihood=loglik,
        dilution_events=dilutions,
        log_likelihood_trace=trace,
    )
    return Reconstruction(DensityMatrix(project_to_physical(rho)), diagnostics)


def fidelity_spread(
    rho: DensityMatrix,
    target,
    settings: Sequence[TomographySetting],
    shots_per_setting: int,
    seeds: Sequence[int],
) -> tuple[float, float]:
    """Mean and standard deviation of reconstructed fidelity over re-simulated data."""
    values = [
        fidelity(mle_reconstruct(simulate_counts(rho, settings, shots_per_setting, s)).rho, target)
        for s in seeds
    ]
    return float(np.mean(values)), float(np.std(values))
