"""Seeded random generators.

Every sampling operation takes an explicit integer seed. Parallel or repeated
tasks derive independent streams from ``(seed, task_index)`` through
``numpy.random.SeedSequence``, so a sweep reproduces bit-for-bit regardless of
execution order.
"""

import logging

import numpy as np

logger = logging.getLogger(__name__)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def derive_seed(seed: int, task_index: int) -> int:
    """Integer seed of task ``task_index``, for APIs that take a plain seed."""
    logger.debug("Deriving seed (seed=%s, task=%s)", seed, task_index)
    return int(np.random.SeedSequence([int(seed), int(task_index)]).generate_state(1)[0])
