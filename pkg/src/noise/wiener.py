"""
Counter-based Wiener increment streams.

Every path owns a Philox generator keyed by (master seed, path index, purpose),
so increments never depend on which worker runs the path or in what order.
Direction k of the truncated cylindrical process is always column k of a draw.
"""
import logging
from dataclasses import dataclass

import numpy as np

from src.core.errors import ConfigurationError

logger = logging.getLogger(__name__)

# spawn-key purposes, kept stable so stored results stay reproducible
INCREMENTS = 0
INITIAL_STATE = 1
SURVEY = 2


def path_stream(seed: int, path_index: int, purpose: int = INCREMENTS) -> np.random.Generator:
    """
    Deterministic Philox stream for one path.

    Args:
        seed: Master seed (unsigned 64-bit)
        path_index: Ensemble index of the path
        purpose: INCREMENTS, INITIAL_STATE or SURVEY

    Returns:
        numpy Generator backed by a counter-based bit generator
    """
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(path_index), int(purpose)))
    return np.random.Generator(np.random.Philox(sequence))


@dataclass(frozen=True)
class WienerIncrement:
    """Δβ_k over one step, k = 1..K, each N(0, dt)."""

    dt: float
    dbeta: np.ndarray

    @property
    def K(self) -> int:
        return self.dbeta.shape[0]


def sample_increment(dt: float, K: int, rng_stream: np.random.Generator) -> WienerIncrement:
    """
    Draw K independent N(0, dt) increments.

    Args:
        dt: Step size (> 0)
        K: Number of Wiener directions
        rng_stream: Generator from `path_stream`

    Returns:
        WienerIncrement

    Raises:
        ConfigurationError: If dt ≤ 0 or K < 0
    """
    if not dt > 0.0:
        raise ConfigurationError(f"dt must be > 0, got {dt}")
    if K < 0:
        raise ConfigurationError(f"K must be >= 0, got {K}")
    dbeta = np.sqrt(dt) * rng_stream.standard_normal(K)
    return WienerIncrement(dt=dt, dbeta=dbeta)
