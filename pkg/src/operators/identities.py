"""
Energy cancellation identities and the monotonicity gap of 𝒬.
"""
import logging
from typing import NamedTuple

import numpy as np

from src.field.basis import ModeSet, PhysicalParams
from src.field.grid import spectral_grid, to_grid
from src.field.norms import w14_fourth
from src.field.state import coefficients
from src.operators.drift import assemble_drift, stress_tensor, tensor_square
from src.operators.forcing import zero_force

logger = logging.getLogger(__name__)


class PairingResiduals(NamedTuple):
    """Residuals of the identities used in the a priori energy estimate; all vanish."""

    convection: float
    alpha1_transport: float
    beta_dissipation: float
    alpha2_cubic: float

    def max_abs(self) -> float:
        return max(abs(v) for v in self)


def energy_pairing_identities(state, params: PhysicalParams, basis: ModeSet, M: int) -> PairingResiduals:
    """
    Pair the assembled drift fields with the state itself.

    Returns:
        (u·∇u, u);
        (α₁div(u·∇A), u);
        (βdiv(|A|²A), u) + (β/2)‖A‖₄⁴;
        (α₂div(A²), u) + (α₂/2)∫A²:A
    """
    c = coefficients(state)
    drift = assemble_drift(c, 0.0, params, zero_force(), basis, M)
    grid = spectral_grid(basis, M)
    _, _, A = grid.synthesize(c)
    A2 = np.sum(A * A, axis=(0, 1))
    a4 = grid.integrate(A2 * A2)
    cubic = grid.integrate(np.sum(tensor_square(A) * A, axis=(0, 1)))

    return PairingResiduals(
        convection=float(-np.dot(drift.convection, c)),
        alpha1_transport=float(np.dot(drift.alpha1_transport, c)),
        beta_dissipation=float(np.dot(drift.beta_term, c) + 0.5 * params.beta * a4),
        alpha2_cubic=float(np.dot(drift.alpha2_term, c) + 0.5 * params.alpha2 * cubic),
    )


def monotonicity_gap(u, y, params: PhysicalParams, basis: ModeSet, M: int) -> float:
    """
    (𝒬(u) - 𝒬(y), u - y) evaluated as ∫ (T(u) - T(y)) : ∇(u - y) on the grid.

    T is the stress integrand μG + α₁(GᵀA+AG) + α₂A² + β|A|²A. Nonnegative
    whenever params.monotone_ok; defined (but not guaranteed) otherwise.
    """
    cu, cy = coefficients(u), coefficients(y)
    grid = spectral_grid(basis, M)
    _, Gu, Au = grid.synthesize(cu)
    _, Gy, Ay = grid.synthesize(cy)
    Gw = grid.gradient(cu - cy)
    difference = stress_tensor(Gu, Au, params) - stress_tensor(Gy, Ay, params)
    return grid.integrate(np.sum(difference * Gw, axis=(0, 1)))


def gap_scale(u, y, basis: ModeSet, M: int) -> float:
    """Cubic tolerance weight ‖u‖_{W^{1,4}}³ + ‖y‖_{W^{1,4}}³ (plus one)."""
    wu = w14_fourth(to_grid(coefficients(u), basis, M)) ** 0.75
    wy = w14_fourth(to_grid(coefficients(y), basis, M)) ** 0.75
    return 1.0 + wu + wy


class BasisResiduals(NamedTuple):
    """Max deviations of the quadrature Gram matrices from their exact values."""

    orthonormality: float
    v_diagonality: float


def basis_exactness(basis: ModeSet, M: int) -> BasisResiduals:
    """
    Compare (v_i, v_j) with δ_ij and (v_i, v_j) + α₁(∇v_i, ∇v_j) with λ_i δ_ij.

    Args:
        basis: Galerkin mode set
        M: Grid resolution

    Returns:
        BasisResiduals (max absolute entrywise errors)
    """
    mass, stiffness = spectral_grid(basis, M).gram()
    v_gram = mass + basis.alpha1 * stiffness
    return BasisResiduals(
        orthonormality=float(np.max(np.abs(mass - np.eye(basis.n)))),
        v_diagonality=float(np.max(np.abs(v_gram - np.diag(basis.lambdas)))),
    )
