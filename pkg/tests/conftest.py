"""Shared test fixtures.

Everything random is seeded, so every test is deterministic.
"""

import numpy as np
import pytest
from scipy.stats import unitary_group

from paritylab.models import NoiseParams
from paritylab.services.qudit import QuditState
from paritylab.services.tomography import DensityMatrix


# ---------------------------------------------------------------------------
# Random generators
# ---------------------------------------------------------------------------

@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture()
def random_state(rng):
    """Factory for Haar-random qudit states."""

    def _make(d: int) -> QuditState:
        return QuditState.normalized(rng.normal(size=d) + 1j * rng.normal(size=d))

    return _make


@pytest.fixture()
def random_unitary():
    """Factory for Haar-random unitaries with an explicit seed."""

    def _make(n: int, seed: int) -> np.ndarray:
        return unitary_group.rvs(n, random_state=seed)

    return _make


@pytest.fixture()
def random_density_matrix(rng):
    """Factory for random full-rank two-qubit density matrices."""

    def _make() -> DensityMatrix:
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = g @ g.conj().T
        return DensityMatrix(rho / np.trace(rho).real)

    return _make


# ---------------------------------------------------------------------------
# Noise
# ---------------------------------------------------------------------------

@pytest.fixture()
def ideal_noise() -> NoiseParams:
    return NoiseParams.ideal()


@pytest.fixture()
def calibrated_noise() -> NoiseParams:
    return NoiseParams(beta=np.sqrt(0.92459), mz_dephasing=0.99691, readout_flip=0.0)
