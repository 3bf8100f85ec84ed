"""
Pseudo-spectral assembly of the Galerkin drift.

Each term is paired with the basis in weak form, never by differentiating
grid products:
    (μΔu, v_j)                 = -μ|k_j|² c_j
    (-u·∇u, v_j)               = -∫ u^i ∂_i u^l v_j^l
    (α₁ div(GᵀA + AG), v_j)    = -α₁ ∫ (GᵀA + AG) : ∇v_j
    (α₁ div(u·∇A), v_j)        =  α₁ Σ ∫ u^i A_lm ∂_i∂_m v_j^l
    (α₂ div(A²), v_j)          = -α₂ ∫ A² : ∇v_j
    (β div(|A|²A), v_j)        = -β ∫ |A|²A : ∇v_j
with G_lm = ∂_m u^l and A = G + Gᵀ.
"""
import logging
from dataclasses import dataclass, fields
from typing import NamedTuple, Tuple

import numpy as np

from src.core.errors import ConfigurationError, DivergedStateError
from src.field.basis import ModeSet, PhysicalParams
from src.field.grid import SpectralGrid, spectral_grid
from src.field.state import coefficients
from src.operators.forcing import ForceModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DriftBreakdown:
    """The seven projected drift fields."""

    laplacian: np.ndarray
    convection: np.ndarray
    alpha1_shear: np.ndarray
    alpha1_transport: np.ndarray
    alpha2_term: np.ndarray
    beta_term: np.ndarray
    force: np.ndarray

    def nonlinear(self) -> np.ndarray:
        """Sum of the fields gated by the cut-off."""
        return self.convection + self.alpha1_shear + self.alpha1_transport + self.alpha2_term + self.beta_term

    def total(self, cutoff: float = 1.0) -> np.ndarray:
        """Drift with the nonlinear part multiplied by `cutoff`."""
        return self.laplacian + self.force + cutoff * self.nonlinear()

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def shear_tensor(G: np.ndarray, A: np.ndarray) -> np.ndarray:
    """GᵀA + AG pointwise."""
    return np.einsum("rlp,rmp->lmp", G, A) + np.einsum("lrp,rmp->lmp", A, G)


def tensor_square(A: np.ndarray) -> np.ndarray:
    return np.einsum("lrp,rmp->lmp", A, A)


def stress_tensor(G: np.ndarray, A: np.ndarray, params: PhysicalParams) -> np.ndarray:
    """μG + α₁(GᵀA + AG) + α₂A² + β|A|²A, the integrand paired by 𝒬."""
    A2 = np.sum(A * A, axis=(0, 1))
    return (
        params.mu * G
        + params.alpha1 * shear_tensor(G, A)
        + params.alpha2 * tensor_square(A)
        + params.beta * A2[None, None, :] * A
    )


def _ensure_finite(name: str, values: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise DivergedStateError(f"non-finite values in drift term '{name}'")
    return values


def _grid_for(state, basis: ModeSet, M: int) -> SpectralGrid:
    shape = coefficients(state).shape
    if shape != (basis.n,):
        raise ConfigurationError(f"state has shape {shape} but basis has {basis.n} modes")
    return spectral_grid(basis, M)


def trilinear_b(u, y, z, basis: ModeSet, M: int) -> float:
    """
    Trilinear form b(u, y, z) = ∫ (u·∇y)·z dx.

    Args:
        u, y, z: States on `basis`
        basis: Galerkin mode set
        M: Grid resolution

    Returns:
        The quadrature value (exact for M ≥ 3·n_max)
    """
    cu, cy, cz = (coefficients(s) for s in (u, y, z))
    for c in (cu, cy, cz):
        if c.shape != (basis.n,):
            raise ConfigurationError(f"state has {c.shape[0]} coefficients but basis has {basis.n} modes")
    grid = spectral_grid(basis, M)
    uu = grid.velocity(cu)
    Gy = grid.gradient(cy)
    zz = grid.velocity(cz)
    return grid.integrate(np.einsum("ip,lip,lp->p", uu, Gy, zz))


class GridFields(NamedTuple):
    """Velocity, gradient and Rivlin–Ericksen tensor on the flattened grid."""

    velocity: np.ndarray
    gradient: np.ndarray
    rivlin_ericksen: np.ndarray


def drift_on_grid(
    c: np.ndarray,
    t: float,
    params: PhysicalParams,
    force: ForceModel,
    grid: SpectralGrid,
    nonlinear: bool = True,
) -> Tuple[DriftBreakdown, GridFields]:
    """
    Assemble the drift on a prepared grid and hand back the synthesized fields.

    With `nonlinear=False` only the Stokes and force terms are evaluated; the
    remaining fields are zero.
    """
    basis = grid.basis
    u, G, A = grid.synthesize(c)
    zeros = np.zeros(basis.n)

    laplacian = -params.mu * basis.k2 * c
    if nonlinear:
        A2 = np.sum(A * A, axis=(0, 1))
        convection = -grid.pair_vector(np.einsum("ip,lip->lp", u, G))
        alpha1_shear = -params.alpha1 * grid.pair_gradient(shear_tensor(G, A))
        alpha1_transport = params.alpha1 * grid.pair_hessian(np.einsum("ip,lmp->ilmp", u, A))
        alpha2_term = -params.alpha2 * grid.pair_gradient(tensor_square(A))
        beta_term = -params.beta * grid.pair_gradient(A2[None, None, :] * A)
    else:
        convection = alpha1_shear = alpha1_transport = alpha2_term = beta_term = zeros

    breakdown = DriftBreakdown(
        laplacian=laplacian,
        convection=convection,
        alpha1_shear=alpha1_shear,
        alpha1_transport=alpha1_transport,
        alpha2_term=alpha2_term,
        beta_term=beta_term,
        force=force.coefficients(t, basis),
    )
    for name, values in breakdown.as_dict().items():
        _ensure_finite(name, values)
    return breakdown, GridFields(u, G, A)


def assemble_drift(
    state,
    t: float,
    params: PhysicalParams,
    force: ForceModel,
    basis: ModeSet,
    M: int,
) -> DriftBreakdown:
    """
    Project every drift term of the Galerkin system onto the basis.

    Args:
        state: SpectralState on `basis`
        t: Time (enters the force only)
        params: Constitutive constants
        force: Body force model
        basis: Galerkin mode set
        M: Grid resolution (≥ 4·n_max)

    Returns:
        DriftBreakdown with one coefficient array per term

    Raises:
        ResolutionError: If M < 4·n_max
        DivergedStateError: If any intermediate is non-finite
    """
    grid = _grid_for(state, basis, M)
    breakdown, _ = drift_on_grid(coefficients(state), t, params, force, grid)
    return breakdown


def q_operator(state, params: PhysicalParams, basis: ModeSet, M: int) -> np.ndarray:
    """
    Coefficients of P_n𝒬(u), 𝒬(u) = -μΔu - α₁div(GᵀA+AG) - α₂div(A²) - βdiv(|A|²A).

    Args:
        state: SpectralState on `basis`
        params: Constitutive constants
        basis: Galerkin mode set
        M: Grid resolution

    Returns:
        Coefficient array (𝒬(u), v_j)
    """
    grid = _grid_for(state, basis, M)
    c = coefficients(state)
    _, G, A = grid.synthesize(c)
    nonlinear = stress_tensor(G, A, params) - params.mu * G
    q = params.mu * basis.k2 * c + grid.pair_gradient(nonlinear)
    return _ensure_finite("q_operator", q)
