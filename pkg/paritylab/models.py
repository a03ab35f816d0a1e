"""Pydantic models for noise parameters, circuit settings and emitted reports."""

import math
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .config import settings


class NoiseParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    beta: float = Field(1.0, ge=0.0, le=1.0)
    mz_dephasing: float = Field(1.0, ge=0.0, le=1.0)
    readout_flip: float = Field(0.0, ge=0.0, le=1.0)

    @classmethod
    def ideal(cls) -> "NoiseParams":
        return cls()

    @classmethod
    def calibrated(cls) -> "NoiseParams":
        return cls(
            beta=math.sqrt(settings.hom_visibility),
            mz_dephasing=settings.mz_visibility,
            readout_flip=0.0,
        )

    @property
    def hom_visibility(self) -> float:
        return self.beta ** 2

    @property
    def is_ideal(self) -> bool:
        return self.beta == 1.0 and self.mz_dephasing == 1.0 and self.readout_flip == 0.0


class CircuitSettings(BaseModel):
    """One row of the permutation settings table. ``None`` = plate removed."""

    model_config = ConfigDict(frozen=True)

    hwp2_deg: float
    hwp4_deg: Optional[float] = None
    hwp5_deg: Optional[float] = None


class CoincidenceRecord(BaseModel):
    HH: int = Field(0, ge=0)
    HV: int = Field(0, ge=0)
    VH: int = Field(0, ge=0)
    VV: int = Field(0, ge=0)
    shots: int = Field(..., ge=1)
    seed: int

    @model_validator(mode="after")
    def _total_matches_shots(self):
        total = self.HH + self.HV + self.VH + self.VV
        if total != self.shots:
            raise ValueError(f"Counts sum to {total}, expected {self.shots}")
        return self

    def counts(self) -> dict[str, int]:
        return {"HH": self.HH, "HV": self.HV, "VH": self.VH, "VV": self.VV}


class WitnessPair(BaseModel):
    """Oracle answer ``y`` to query ``x`` and the two specs that both produce it."""

    x: int
    y: int
    positive_m: int
    negative_m: int


class CertificateReport(BaseModel):
    d: int
    strategies_enumerated: int
    best_one_query_worst_case: float
    best_one_query_average: float
    deterministic_spec_worst_case: float
    two_query_success: float
    quantum_queries: int = 1
    classical_queries_required: int = 2
    speedup_ratio: float = 2.0
    derived: bool = True
    witness_pairs: list[WitnessPair] = []
    notes: list[str] = []


class SpecResult(BaseModel):
    """Per-permutation outcome of a sweep, mirroring one group of bars."""

    spec: str
    d: int
    m: int
    sign: str
    ideal_probs: list[float]
    measured_probs: list[float]
    correct_index: int
    success_mean: float
    success_std: float = 0.0
    majority_success_rate: float = 1.0


class SweepSummary(BaseModel):
    results: list[SpecResult] = []
    average_success: float = 0.0
    average_success_std: float = 0.0
    average_majority_success: float = 1.0
    reference_average_success: Optional[float] = None
    reference_average_success_std: Optional[float] = None


class MLEDiagnostics(BaseModel):
    iterations: int
    converged: bool
    log_likelihood: float
    dilution_events: int = 0
    log_likelihood_trace: list[float] = []


class SubmoduleReport(BaseModel):
    """Post-selected two-qubit map of a BD interferometer (``hwp2_deg`` unset for custom networks)."""

    hwp2_deg: Optional[float] = None
    matrix: list[list[list[float]]]
    postselection_probability: list[float]
    cnot_overlap: float
    xx_overlap: float


class RunConfig(BaseModel):
    """Effective configuration of one CLI invocation, echoed into artifacts."""

    command: str
    seed: int
    out: Optional[str] = None
    format: str = "json"
    params: dict[str, Any] = {}
