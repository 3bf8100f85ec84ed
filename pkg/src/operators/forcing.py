"""
Deterministic body-force families Φ(t, u).
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence, Tuple

import numpy as np

from src.core.errors import ConfigurationError
from src.field.basis import SIN, ModeSet

logger = logging.getLogger(__name__)

ForceKind = Literal["zero", "constant_field", "decaying"]


@dataclass(frozen=True)
class ForceModel:
    """
    Spatial profile times a time envelope.

    constant_field: Φ(t) = profile
    decaying:       Φ(t) = e^{-η₁t/2} profile, so ‖Φ(t)‖₂² = e^{-η₁t}‖profile‖₂²
    """

    kind: ForceKind = "zero"
    c_phi: float = 0.0
    eta1: float = 0.0
    payload: np.ndarray = field(default=None, repr=False)

    def profile(self, basis: ModeSet) -> np.ndarray:
        if self.kind == "zero" or self.payload is None:
            return np.zeros(basis.n)
        if self.payload.shape != (basis.n,):
            raise ConfigurationError(f"force profile has {self.payload.shape[0]} coefficients, basis has {basis.n}")
        return self.payload

    def envelope(self, t: float) -> float:
        if self.kind == "decaying":
            return math.exp(-0.5 * self.eta1 * t)
        return 1.0

    def coefficients(self, t: float, basis: ModeSet) -> np.ndarray:
        """(Φ(t), v_j) for every mode."""
        if self.kind == "zero":
            return np.zeros(basis.n)
        return self.envelope(t) * self.profile(basis)

    def profile_norm_sq(self) -> float:
        if self.kind == "zero" or self.payload is None:
            return 0.0
        return float(np.dot(self.payload, self.payload))

    def decay_bound_ok(self, c_ell: float) -> bool:
        """‖Φ(t,u)‖₂² ≤ c_Φ C_ℓ e^{-η₁t}(1+‖u‖_V²) holds for every t and u."""
        return self.profile_norm_sq() <= self.c_phi * c_ell


def mode_profile(
    basis: ModeSet,
    amplitude: float,
    wavevectors: Sequence[Tuple[int, int]],
    parity: int = SIN,
) -> np.ndarray:
    """
    Profile with `amplitude` on each listed mode.

    Args:
        basis: Galerkin mode set
        amplitude: Coefficient placed on each mode
        wavevectors: Wavevectors to excite
        parity: COS or SIN member of each pair

    Returns:
        Coefficient array of length basis.n
    """
    profile = np.zeros(basis.n)
    for k in wavevectors:
        try:
            profile[basis.index_of(tuple(k), parity)] = amplitude
        except KeyError as e:
            raise ConfigurationError(str(e)) from e
    return profile


def zero_force() -> ForceModel:
    return ForceModel(kind="zero")
