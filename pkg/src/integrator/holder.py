"""
Discrete Hölder norm of a sampled path in H.
"""
import logging
from typing import NamedTuple

import numpy as np
from scipy.spatial.distance import pdist

from src.core.errors import ConfigurationError

logger = logging.getLogger(__name__)


class HolderEstimate(NamedTuple):
    seminorm: float
    sup_norm: float
    delta: float
    n_times: int

    @property
    def total(self) -> float:
        """sup ‖U‖_H + [U]_{C^δ}."""
        return self.sup_norm + self.seminorm


def holder_parts(times: np.ndarray, states: np.ndarray, delta: float) -> HolderEstimate:
    """
    Seminorm max_{s<t} ‖U(t) - U(s)‖_H / |t - s|^δ and sup ‖U‖_H over the samples.

    Args:
        times: Distinct sample times, shape (S,)
        states: Coefficient rows, shape (S, n)
        delta: Exponent in (0, 1)

    Returns:
        HolderEstimate

    Raises:
        ConfigurationError: If delta is outside (0, 1) or fewer than two samples are given
    """
    if not 0.0 < delta < 1.0:
        raise ConfigurationError(f"Hölder exponent must lie in (0, 1), got {delta}")
    times = np.asarray(times, dtype=float)
    states = np.asarray(states, dtype=float)
    if times.shape[0] < 2 or states.shape[0] != times.shape[0]:
        raise ConfigurationError(
            f"need at least two matching samples, got {times.shape[0]} times and {states.shape[0]} states"
        )

    gaps = pdist(times[:, None])
    if np.any(gaps <= 0.0):
        raise ConfigurationError("sample times must be distinct")
    seminorm = float(np.max(pdist(states) / gaps ** delta))
    sup_norm = float(np.max(np.linalg.norm(states, axis=1)))
    return HolderEstimate(seminorm=seminorm, sup_norm=sup_norm, delta=delta, n_times=times.shape[0])


def holder_seminorm(path, delta: float) -> float:
    """
    C^{0,δ}([0,T]; H) norm of a PathRecord's saved states.

    Args:
        path: PathRecord (any object with `times` and `states`)
        delta: Exponent in (0, 1)

    Returns:
        sup ‖U(t)‖_H + max_{s<t} ‖U(t) - U(s)‖_H / |t - s|^δ
    """
    estimate = holder_parts(path.times, path.states, delta)
    logger.debug(f"Hölder seminorm {estimate.seminorm:.6g} over {estimate.n_times} samples (δ={delta})")
    return estimate.total
