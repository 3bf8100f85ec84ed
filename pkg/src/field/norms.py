"""
Norms, inner products and the modified Stokes (Riesz) lift.

H and V norms are exact in the eigenbasis; L⁴-type functionals use grid quadrature.
"""
import logging
from typing import Optional, Union

import numpy as np

from src.core.errors import ConfigurationError, UndefinedRatioError
from src.field.basis import ModeSet
from src.field.grid import GridTensorField, to_grid
from src.field.state import SpectralState, coefficients

logger = logging.getLogger(__name__)

StateLike = Union[SpectralState, np.ndarray]


def _checked(state: StateLike, basis: ModeSet) -> np.ndarray:
    c = coefficients(state)
    if c.shape[-1] != basis.n:
        raise ConfigurationError(f"state has {c.shape[-1]} coefficients but basis has {basis.n} modes")
    return c


def norm_h(state: StateLike) -> float:
    """‖u‖₂ = (Σ c_j²)^{1/2}."""
    c = coefficients(state)
    return float(np.sqrt(np.dot(c, c)))


def norm_v_sq(state: StateLike, basis: ModeSet) -> float:
    """‖u‖_V² = Σ λ_j c_j²."""
    c = _checked(state, basis)
    return float(np.dot(basis.lambdas, c * c))


def norm_v(state: StateLike, basis: ModeSet) -> float:
    """‖u‖_V = ((u - α₁Δu, u))^{1/2}."""
    return float(np.sqrt(norm_v_sq(state, basis)))


def inner_v(u: StateLike, y: StateLike, basis: ModeSet) -> float:
    """(u, y)_V = Σ λ_j u_j y_j."""
    return float(np.dot(basis.lambdas, _checked(u, basis) * _checked(y, basis)))


def grad_l2_sq(state: StateLike, basis: ModeSet) -> float:
    """‖∇u‖₂² = Σ |k_j|² c_j²."""
    c = _checked(state, basis)
    return float(np.dot(basis.k2, c * c))


def a_l4_fourth(grid: GridTensorField) -> float:
    """∫ |A|⁴ dx with |A|² = Σ_ij A_ij²."""
    A2 = np.sum(grid.rivlin_ericksen ** 2, axis=(0, 1))
    return grid.integrate(A2 * A2)


def norm_a_l4(grid: GridTensorField) -> float:
    """
    ‖A‖₄ = (∫ |A|⁴ dx)^{1/4} by grid quadrature.

    Args:
        grid: Synthesized field with the Rivlin–Ericksen tensor populated

    Returns:
        The L⁴ norm of A
    """
    return float(a_l4_fourth(grid) ** 0.25)


def w14_fourth(grid: GridTensorField) -> float:
    """‖u‖_{W^{1,4}}⁴ = ∫ |u|⁴ + |∇u|⁴ dx."""
    u2 = np.sum(grid.velocity ** 2, axis=0)
    g2 = np.sum(grid.gradient ** 2, axis=(0, 1))
    return grid.integrate(u2 * u2 + g2 * g2)


def korn_ratio(state: StateLike, basis: ModeSet, M: Optional[int] = None) -> float:
    """
    Ratio ‖u‖_{W^{1,4}} / ‖A(u)‖₄ (bounded by Korn's inequality).

    Args:
        state: Nonzero state on `basis`
        basis: Galerkin mode set
        M: Grid resolution (defaults to 4·n_max)

    Returns:
        The Korn ratio

    Raises:
        UndefinedRatioError: If the state is zero
    """
    c = _checked(state, basis)
    if not np.any(c):
        raise UndefinedRatioError("Korn ratio is undefined for the zero state")
    grid = to_grid(c, basis, M or 4 * basis.n_max)
    a4 = a_l4_fourth(grid)
    if a4 <= 0.0:
        raise UndefinedRatioError("Korn ratio is undefined when A(u) vanishes")
    return float((w14_fourth(grid) / a4) ** 0.25)


def riesz_stokes(f_coeffs: StateLike, basis: ModeSet) -> np.ndarray:
    """
    Solve the modified Stokes problem f̃ - α₁Δf̃ + ∇p = f in the eigenbasis.

    Args:
        f_coeffs: Coefficients (f, v_j); a trailing axis of length n, leading axes are batched
        basis: Galerkin mode set

    Returns:
        Coefficients of f̃, satisfying (f̃, g)_V = (f, g) for every g in the span
    """
    f = _checked(f_coeffs, basis)
    return f / basis.lambdas
