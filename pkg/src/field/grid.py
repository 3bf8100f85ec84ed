"""
Dense spectral synthesis/analysis between Galerkin coefficients and an M×M grid.

Every mode is v_j(x) = p_j S_j(x) with S_j = cos(k_j·x)/(√2π) or sin(k_j·x)/(√2π).
Derivatives only need the phase derivative D_j = ∂S_j/∂(k_j·x):
    ∂_m v_j^l       =  p_j^l k_j^m D_j
    ∂_i ∂_m v_j^l   = -p_j^l k_j^i k_j^m S_j
so two (n × M²) tables cover synthesis, gradients, projections and all weak pairings.
Quadrature is the uniform trapezoidal rule with weight (2π/M)².
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from src.core.errors import ResolutionError
from src.field.basis import COS, ModeSet
from src.field.state import SpectralState, coefficients

logger = logging.getLogger(__name__)

MODE_NORM = 1.0 / (math.sqrt(2.0) * math.pi)

# Resolution needed for an alias-free quartic integrand, per unit of n_max.
DEALIAS_FACTOR = 4


def check_resolution(basis: ModeSet, M: int) -> None:
    """
    Raise ResolutionError unless M ≥ 4·n_max.

    Args:
        basis: Mode set to be synthesized
        M: Grid points per direction
    """
    if M < DEALIAS_FACTOR * basis.n_max:
        raise ResolutionError(
            f"grid resolution M={M} is below {DEALIAS_FACTOR}*n_max={DEALIAS_FACTOR * basis.n_max} "
            f"required for dealiased cubic nonlinearities"
        )


@dataclass(frozen=True)
class GridTensorField:
    """Velocity, gradient G_lm = ∂_m u^l and A = G + Gᵀ sampled on the grid."""

    resolution: int
    velocity: np.ndarray
    gradient: np.ndarray
    rivlin_ericksen: np.ndarray

    @property
    def weight(self) -> float:
        return (2.0 * math.pi / self.resolution) ** 2

    def integrate(self, values: np.ndarray) -> float:
        """Trapezoidal quadrature of a scalar grid field over [0,2π)²."""
        return float(self.weight * np.sum(values))

    def divergence(self) -> np.ndarray:
        return self.gradient[0, 0] + self.gradient[1, 1]


class SpectralGrid:
    """
    Synthesis/analysis tables for one (basis, M) pair.

    Instances are immutable and cached per process by `spectral_grid`.
    """

    def __init__(self, basis: ModeSet, M: int):
        """
        Precompute the mode tables.

        Args:
            basis: Galerkin mode set
            M: Grid points per direction (≥ 4·n_max)
        """
        check_resolution(basis, M)
        self.basis = basis
        self.M = M
        self.weight = (2.0 * math.pi / M) ** 2

        x = 2.0 * math.pi * np.arange(M) / M
        X, Y = np.meshgrid(x, x, indexing="ij")
        self.points = np.stack([X.ravel(), Y.ravel()])

        k = basis.wavevectors.astype(float)
        phase = k @ self.points
        is_cos = (basis.parities == COS)[:, None]
        self.S = MODE_NORM * np.where(is_cos, np.cos(phase), np.sin(phase))
        self.D = MODE_NORM * np.where(is_cos, -np.sin(phase), np.cos(phase))

        self.k = k
        self.p = basis.polarizations
        # pk[l, m, j] = p_j^l k_j^m
        self.pk = np.einsum("jl,jm->lmj", self.p, self.k)
        # kpk[i, l, m, j] = k_j^i p_j^l k_j^m
        self.kpk = np.einsum("ji,jl,jm->ilmj", self.k, self.p, self.k)

        for arr in (self.points, self.S, self.D, self.pk, self.kpk):
            arr.setflags(write=False)
        logger.debug(f"Spectral grid ready: {basis.n} modes on {M}x{M}")

    @property
    def n_points(self) -> int:
        return self.M * self.M

    def velocity(self, c: np.ndarray) -> np.ndarray:
        """u^l on the flattened grid, shape (2, M²)."""
        return (c[None, :] * self.p.T) @ self.S

    def gradient(self, c: np.ndarray) -> np.ndarray:
        """G_lm = ∂_m u^l on the flattened grid, shape (2, 2, M²)."""
        weights = self.pk * c[None, None, :]
        return (weights.reshape(4, -1) @ self.D).reshape(2, 2, -1)

    def synthesize(self, c: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Velocity, gradient and Rivlin–Ericksen tensor on the flattened grid."""
        u = self.velocity(c)
        G = self.gradient(c)
        A = G + G.transpose(1, 0, 2)
        return u, G, A

    def integrate(self, values: np.ndarray) -> float:
        return float(self.weight * np.sum(values))

    def gram(self) -> Tuple[np.ndarray, np.ndarray]:
        """Quadrature Gram matrices (v_i, v_j) and (∇v_i, ∇v_j)."""
        pp = self.p @ self.p.T
        mass = self.weight * pp * (self.S @ self.S.T)
        stiffness = self.weight * pp * (self.k @ self.k.T) * (self.D @ self.D.T)
        return mass, stiffness

    def pair_vector(self, F: np.ndarray) -> np.ndarray:
        """(F, v_j) for a vector field F of shape (2, M²)."""
        return self.weight * np.sum(self.p.T * (F @ self.S.T), axis=0)

    def pair_gradient(self, T: np.ndarray) -> np.ndarray:
        """∫ T : ∇v_j = Σ_lm ∫ T_lm ∂_m v_j^l for a tensor field of shape (2, 2, M²)."""
        projected = T.reshape(4, -1) @ self.D.T
        return self.weight * np.sum(self.pk.reshape(4, -1) * projected, axis=0)

    def pair_hessian(self, F: np.ndarray) -> np.ndarray:
        """Σ_ilm ∫ F_ilm ∂_i∂_m v_j^l for a field of shape (2, 2, 2, M²)."""
        projected = F.reshape(8, -1) @ self.S.T
        return -self.weight * np.sum(self.kpk.reshape(8, -1) * projected, axis=0)


@lru_cache(maxsize=16)
def spectral_grid(basis: ModeSet, M: int) -> SpectralGrid:
    """Per-process cached SpectralGrid for (basis, M)."""
    return SpectralGrid(basis, M)


def to_grid(state, basis: ModeSet, M: int) -> GridTensorField:
    """
    Synthesize velocity, gradient and A on an M×M grid.

    Args:
        state: SpectralState (or coefficient array) on `basis`
        basis: Galerkin mode set
        M: Grid points per direction

    Returns:
        GridTensorField with arrays shaped (2, M, M) and (2, 2, M, M)

    Raises:
        ResolutionError: If M < 4·n_max
    """
    if isinstance(state, SpectralState):
        state.check_basis(basis)
    grid = spectral_grid(basis, M)
    u, G, A = grid.synthesize(coefficients(state))
    return GridTensorField(
        resolution=M,
        velocity=u.reshape(2, M, M),
        gradient=G.reshape(2, 2, M, M),
        rivlin_ericksen=A.reshape(2, 2, M, M),
    )


def project(vector_field: np.ndarray, basis: ModeSet) -> np.ndarray:
    """
    L²-orthogonal projection P_n of a grid vector field onto the basis.

    Args:
        vector_field: Array of shape (2, M, M) sampled on the uniform grid
        basis: Galerkin mode set

    Returns:
        Coefficients (f, v_j), one per mode

    Raises:
        ResolutionError: If the field is not square or M < 4·n_max
    """
    field = np.asarray(vector_field, dtype=float)
    if field.ndim != 3 or field.shape[0] != 2 or field.shape[1] != field.shape[2]:
        raise ResolutionError(f"expected a (2, M, M) vector field, got shape {field.shape}")
    M = field.shape[1]
    grid = spectral_grid(basis, M)
    return grid.pair_vector(field.reshape(2, -1))
