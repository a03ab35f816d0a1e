"""Application configuration from environment variables."""

import os
from dataclasses import dataclass

from dotenv import load_dotenv

load_dotenv()


@dataclass(frozen=True)
class Settings:
    default_seed: int = int(os.environ.get("PARITYLAB_SEED", "20150101"))

    default_shots: int = int(os.environ.get("PARITYLAB_SHOTS", "100000"))
    tomo_shots_per_setting: int = int(os.environ.get("PARITYLAB_TOMO_SHOTS", "10000"))

    # Characterisation figures the noise model is calibrated against
    hom_visibility: float = float(os.environ.get("PARITYLAB_HOM_VISIBILITY", "0.92459"))
    mz_visibility: float = float(os.environ.get("PARITYLAB_MZ_VISIBILITY", "0.99691"))

    cnot_angle_deg: float = float(os.environ.get("PARITYLAB_CNOT_ANGLE_DEG", "17.5"))

    readout_labels: str = os.environ.get("PARITYLAB_READOUT_LABELS", "encoding")

    tolerance: float = float(os.environ.get("PARITYLAB_TOLERANCE", "1e-9"))

    log_level: str = os.environ.get("PARITYLAB_LOG_LEVEL", "WARNING")


settings = Settings()

# Measured reference figures, printed next to simulated values
REFERENCE_SUCCESS_MEAN = 0.93023
REFERENCE_SUCCESS_STD = 0.02015
REFERENCE_BELL_FIDELITY = 0.89180
REFERENCE_BELL_FIDELITY_STD = 0.02987
REFERENCE_HOM_VISIBILITY_STD = 0.00372
