"""
Resolved simulation configuration and initial-state laws.
"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Literal, Optional

import numpy as np

from src.core.errors import ConfigurationError
from src.field.basis import COS, SIN, ModeSet, PhysicalParams, build_basis
from src.field.grid import DEALIAS_FACTOR
from src.field.state import SpectralState
from src.integrator.cutoff import CutoffSpec
from src.noise.diffusion import NoiseModel, build_noise_model
from src.noise.wiener import INITIAL_STATE, path_stream
from src.operators.forcing import ForceModel, zero_force

logger = logging.getLogger(__name__)

InitialKind = Literal["zero", "lowest_modes", "random", "explicit"]


@dataclass(frozen=True)
class InitialLaw:
    """
    Law of U₀.

    lowest_modes: equal coefficients on the |k| = 1 modes with ‖U₀‖_V² = energy
    random:       independent Gaussian coefficients, variance ∝ |k|^{-4}, E‖U₀‖_V² = energy
    explicit:     the given state
    """

    kind: InitialKind = "lowest_modes"
    energy: float = 1.0
    state: Optional[SpectralState] = field(default=None, repr=False)


@lru_cache(maxsize=32)
def cached_basis(n_max: int, alpha1: float) -> ModeSet:
    return build_basis(n_max, PhysicalParams(mu=1.0, alpha1=alpha1, alpha2=0.0, beta=0.0))


@dataclass(frozen=True)
class SimConfig:
    """Everything `simulate_path` needs; picklable so worker processes can receive it."""

    n_max: int
    M: int
    dt: float
    T_end: float
    params: PhysicalParams
    cutoff: CutoffSpec = CutoffSpec()
    force: ForceModel = field(default_factory=zero_force)
    noise: NoiseModel = field(default_factory=lambda: build_noise_model("additive", 0))
    initial: InitialLaw = InitialLaw()
    save_stride: int = 1
    nonlinear: bool = True

    @property
    def basis(self) -> ModeSet:
        return cached_basis(self.n_max, self.params.alpha1)

    @property
    def n_steps(self) -> int:
        return int(round(self.T_end / self.dt))

    def violations(self, stability: bool = False) -> List[str]:
        """
        Every constraint the configuration breaks.

        Args:
            stability: Also require the monotonicity region

        Returns:
            Messages, empty when the configuration is valid
        """
        errors = []
        if self.n_max < 1:
            errors.append(f"n_max must be >= 1, got {self.n_max}")
        if not self.dt > 0.0:
            errors.append(f"dt must be > 0, got {self.dt}")
        if not self.T_end >= self.dt:
            errors.append(f"T_end={self.T_end} must be >= dt={self.dt}")
        if self.M < DEALIAS_FACTOR * self.n_max:
            errors.append(
                f"M={self.M} violates the dealiasing constraint M >= {DEALIAS_FACTOR}*n_max = {DEALIAS_FACTOR * self.n_max}"
            )
        if self.save_stride < 1:
            errors.append(f"save_stride must be >= 1, got {self.save_stride}")
        errors.extend(self.params.admissibility_errors(stability=stability))
        if self.noise.kind == "decaying_multiplicative" and not self.noise.eta1 > 0.0:
            errors.append(f"noise eta1 must be > 0 for decaying noise (DIFSTAT e^(-eta1 t)), got {self.noise.eta1}")
        if self.force.kind == "decaying":
            if not self.force.eta1 > 0.0:
                errors.append(f"force eta1 must be > 0 for a decaying force (ForceSTAT), got {self.force.eta1}")
            if not self.force.decay_bound_ok(self.noise.c_ell):
                errors.append(
                    f"force profile norm^2 {self.force.profile_norm_sq():.6g} exceeds c_phi*C_ell = "
                    f"{self.force.c_phi * self.noise.c_ell:.6g} (ForceSTAT)"
                )
        if self.initial.energy < 0.0:
            errors.append(f"initial energy must be >= 0, got {self.initial.energy}")
        return errors

    def require_valid(self, stability: bool = False) -> None:
        errors = self.violations(stability=stability)
        if errors:
            raise ConfigurationError("; ".join(errors))


def _random_variances(basis: ModeSet, energy: float) -> np.ndarray:
    weights = basis.k2 ** -2.0
    return energy * weights / np.dot(basis.lambdas, weights)


def initial_state(config: SimConfig, path_index: int) -> SpectralState:
    """
    Draw U₀ for one path.

    Args:
        config: Simulation configuration
        path_index: Ensemble index (keys the random law's stream)

    Returns:
        SpectralState at t = 0
    """
    basis = config.basis
    law = config.initial
    if law.kind == "zero" or (law.energy == 0.0 and law.kind != "explicit"):
        return SpectralState.zeros(basis)
    if law.kind == "explicit":
        if law.state is None:
            raise ConfigurationError("explicit initial law needs a state")
        law.state.check_basis(basis)
        return SpectralState(law.state.coeffs, 0.0)
    if law.kind == "lowest_modes":
        c = np.zeros(basis.n)
        for k in ((1, 0), (0, 1)):
            for parity in (COS, SIN):
                c[basis.index_of(k, parity)] = 1.0
        c *= np.sqrt(law.energy / np.dot(basis.lambdas, c * c))
        return SpectralState(c, 0.0)
    if law.kind == "random":
        variances = _random_variances(basis, law.energy)
        rng = path_stream(config.noise.seed, path_index, INITIAL_STATE)
        return SpectralState(np.sqrt(variances) * rng.standard_normal(basis.n), 0.0)
    raise ConfigurationError(f"unknown initial law {law.kind!r}")


def expected_initial_energy(config: SimConfig) -> float:
    """E‖U₀‖_V² of the configured law."""
    law = config.initial
    if law.kind == "zero":
        return 0.0
    if law.kind == "explicit":
        c = law.state.coeffs
        return float(np.dot(config.basis.lambdas, c * c))
    return float(law.energy)


def initial_second_moments(config: SimConfig) -> np.ndarray:
    """𝔼 c_j(0)² for every mode under the configured law."""
    if config.initial.kind == "random" and config.initial.energy > 0.0:
        return _random_variances(config.basis, config.initial.energy)
    c = initial_state(config, 0).coeffs
    return c * c
