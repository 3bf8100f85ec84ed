"""
Constitutive parameters and the divergence-free Fourier eigenbasis on the 2-torus.

The Galerkin space is spanned by real transverse modes
    v(x) = k⊥/|k| · cos(k·x)/(√2π)   or   k⊥/|k| · sin(k·x)/(√2π),
which are orthonormal in L²([0,2π)²) and diagonalize the V inner product
(u, y)_V = (u, y) + α₁(∇u, ∇y) with eigenvalue λ = 1 + α₁|k|².
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.core.errors import ConfigurationError

logger = logging.getLogger(__name__)

COS = 0
SIN = 1

# Relative slack on the region inequalities so boundary parameter sets count as inside.
REGION_RTOL = 1e-12


class PhysicalParams(BaseModel):
    """
    Constitutive constants of the third-grade fluid.

    β = 0 is accepted so the operators can be exercised in degenerate regimes;
    `require_simulation_ready` rejects it for simulation configs.
    """

    model_config = ConfigDict(frozen=True)

    mu: float = Field(gt=0.0, description="viscosity")
    alpha1: float = Field(ge=0.0, description="first normal-stress modulus")
    alpha2: float = Field(description="second normal-stress modulus")
    beta: float = Field(ge=0.0, description="material modulus")

    @property
    def fosdick_ok(self) -> bool:
        """|α₁+α₂| ≤ sqrt(24 μ β)."""
        lhs = (self.alpha1 + self.alpha2) ** 2
        rhs = 24.0 * self.mu * self.beta
        return lhs <= rhs * (1.0 + REGION_RTOL)

    @property
    def monotone_ok(self) -> bool:
        """3α₁² + 4(α₁+α₂)² ≤ 24 μ β."""
        lhs = 3.0 * self.alpha1 ** 2 + 4.0 * (self.alpha1 + self.alpha2) ** 2
        rhs = 24.0 * self.mu * self.beta
        return lhs <= rhs * (1.0 + REGION_RTOL)

    def admissibility_errors(self, stability: bool = False) -> List[str]:
        """
        List the admissibility regions this parameter set violates.

        Args:
            stability: Also require the monotonicity region (stability experiments)

        Returns:
            Human-readable messages, empty when the set is admissible
        """
        errors = []
        if self.beta <= 0.0:
            errors.append(
                "beta must be > 0 for simulation: the monotonicity region "
                "(RESTMON) 3*alpha1^2 + 4*(alpha1+alpha2)^2 <= 24*mu*beta needs beta > 0"
            )
        if not self.fosdick_ok:
            errors.append(
                f"|alpha1+alpha2| = {abs(self.alpha1 + self.alpha2):.6g} exceeds "
                f"sqrt(24*mu*beta) = {math.sqrt(24.0 * self.mu * self.beta):.6g} (Fosdick-Rajagopal region, Fosdic)"
            )
        if stability and not self.monotone_ok:
            lhs = 3.0 * self.alpha1 ** 2 + 4.0 * (self.alpha1 + self.alpha2) ** 2
            errors.append(
                f"3*alpha1^2 + 4*(alpha1+alpha2)^2 = {lhs:.6g} exceeds "
                f"24*mu*beta = {24.0 * self.mu * self.beta:.6g} (monotonicity region, RESTMON)"
            )
        return errors

    def require_simulation_ready(self, stability: bool = False) -> None:
        """Raise ConfigurationError when the set is inadmissible for simulation."""
        errors = self.admissibility_errors(stability=stability)
        if errors:
            raise ConfigurationError("; ".join(errors))


@dataclass(frozen=True)
class DivFreeMode:
    """A single real transverse Fourier mode."""

    wavevector: Tuple[int, int]
    parity: int
    polarization: Tuple[float, float]
    lam: float

    @property
    def k2(self) -> int:
        return self.wavevector[0] ** 2 + self.wavevector[1] ** 2


@dataclass(frozen=True, eq=False)
class ModeSet:
    """
    Ordered Galerkin basis with |k|_∞ ≤ n_max.

    Modes are sorted by (|k|², k_x, k_y, parity); ±k share one wavevector
    (k_x > 0, or k_x = 0 and k_y > 0) with a cosine and a sine member.
    """

    n_max: int
    alpha1: float
    modes: Tuple[DivFreeMode, ...]
    wavevectors: np.ndarray = field(repr=False)
    polarizations: np.ndarray = field(repr=False)
    parities: np.ndarray = field(repr=False)
    lambdas: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.modes)

    @property
    def k2(self) -> np.ndarray:
        return np.sum(self.wavevectors.astype(float) ** 2, axis=1)

    def index_of(self, wavevector: Tuple[int, int], parity: int) -> int:
        """
        Position of a mode in the ordering.

        Raises:
            KeyError: If the mode is not part of the set
        """
        for j, mode in enumerate(self.modes):
            if mode.wavevector == tuple(wavevector) and mode.parity == parity:
                return j
        raise KeyError(f"mode {tuple(wavevector)}/{parity} not in basis with n_max={self.n_max}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, ModeSet):
            return NotImplemented
        return self.n_max == other.n_max and self.alpha1 == other.alpha1

    def __hash__(self) -> int:
        return hash((self.n_max, self.alpha1))


def _representatives(n_max: int) -> List[Tuple[int, int]]:
    reps = []
    for kx in range(0, n_max + 1):
        for ky in range(-n_max, n_max + 1):
            if kx > 0 or ky > 0:
                reps.append((kx, ky))
    return reps


def build_basis(n_max: int, params: PhysicalParams) -> ModeSet:
    """
    Build every divergence-free Fourier mode with |k|_∞ ≤ n_max.

    Args:
        n_max: Largest wavenumber component (≥ 1)
        params: Constitutive constants; only α₁ enters the eigenvalues

    Returns:
        ModeSet in deterministic (|k|², k_x, k_y, parity) order
    """
    if n_max < 1:
        raise ConfigurationError(f"n_max must be >= 1, got {n_max}")

    keyed = []
    for kx, ky in _representatives(n_max):
        for parity in (COS, SIN):
            keyed.append(((kx * kx + ky * ky, kx, ky, parity), (kx, ky), parity))
    keyed.sort(key=lambda item: item[0])

    modes = []
    for _, (kx, ky), parity in keyed:
        norm = math.hypot(kx, ky)
        polarization = (ky / norm, -kx / norm)
        lam = 1.0 + params.alpha1 * (kx * kx + ky * ky)
        modes.append(DivFreeMode(wavevector=(kx, ky), parity=parity, polarization=polarization, lam=lam))

    wavevectors = np.array([m.wavevector for m in modes], dtype=np.int64)
    polarizations = np.array([m.polarization for m in modes], dtype=float)
    parities = np.array([m.parity for m in modes], dtype=np.int64)
    lambdas = np.array([m.lam for m in modes], dtype=float)
    for arr in (wavevectors, polarizations, parities, lambdas):
        arr.setflags(write=False)

    logger.debug(f"Built basis n_max={n_max}: {len(modes)} modes")
    return ModeSet(
        n_max=n_max,
        alpha1=params.alpha1,
        modes=tuple(modes),
        wavevectors=wavevectors,
        polarizations=polarizations,
        parities=parities,
        lambdas=lambdas,
    )
