"""
Multiplicative diffusion families σ(t, u) = Σ_k σ^k(t, u) dβ_k.

    additive                 σ^k = a_k v_{k mod n}
    linear_multiplicative    σ^k = a_k u
    decaying_multiplicative  σ^k = e^{-η₁t/2} a_k u

with a_k = scale · k^{-decay}; the default decay 1 gives a_k² = scale² λ_k for the
Q-spectrum λ_k = k^{-2}. For all three families Σ‖σ^k‖₂² ≤ (Σa_k²)(1+‖u‖_V²).
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.special import zeta

from src.core.errors import ConfigurationError
from src.field.basis import ModeSet
from src.field.state import coefficients

logger = logging.getLogger(__name__)

NoiseKind = Literal["additive", "linear_multiplicative", "decaying_multiplicative"]
NOISE_KINDS = ("additive", "linear_multiplicative", "decaying_multiplicative")


@dataclass(frozen=True)
class NoiseModel:
    """Truncated diffusion family with its Lipschitz/growth constants."""

    K: int
    kind: NoiseKind
    amplitudes: np.ndarray = field(repr=False)
    kappa: float
    ell: float
    eta1: float = 0.0
    amplitude_scale: float = 0.0
    amplitude_decay: float = 1.0
    seed: int = 0

    @property
    def q_spectrum(self) -> np.ndarray:
        """λ_k = k^{-2}, k = 1..K."""
        return np.arange(1, self.K + 1, dtype=float) ** -2.0

    @property
    def c_ell(self) -> float:
        """C_ℓ of the decay hypothesis; equals the growth constant for these families."""
        return self.ell

    def tail_mass(self) -> float:
        """Σ_{k>K} a_k², the truncation error of the cylindrical sum."""
        exponent = 2.0 * self.amplitude_decay
        if self.amplitude_scale == 0.0:
            return 0.0
        if exponent <= 1.0:
            return math.inf
        return float(self.amplitude_scale ** 2 * zeta(exponent, self.K + 1))

    def envelope(self, t: float) -> float:
        if self.kind == "decaying_multiplicative":
            return math.exp(-0.5 * self.eta1 * t)
        return 1.0

    @property
    def is_multiplicative(self) -> bool:
        return self.kind != "additive"


def build_noise_model(
    kind: str,
    K: int,
    amplitude_scale: float = 0.0,
    amplitude_decay: float = 1.0,
    eta1: float = 0.0,
    seed: int = 0,
) -> NoiseModel:
    """
    Construct a NoiseModel with a_k = scale·k^{-decay}.

    Args:
        kind: One of NOISE_KINDS
        K: Truncation level (≥ 0)
        amplitude_scale: Overall amplitude
        amplitude_decay: Power-law exponent of a_k
        eta1: Decay rate (decaying_multiplicative only, must be > 0 there)
        seed: Master seed of the increment streams

    Returns:
        NoiseModel with κ and ℓ computed in closed form
    """
    if kind not in NOISE_KINDS:
        raise ConfigurationError(f"unknown noise kind {kind!r}; expected one of {NOISE_KINDS}")
    if K < 0:
        raise ConfigurationError(f"K must be >= 0, got {K}")
    if kind == "decaying_multiplicative" and not eta1 > 0.0:
        raise ConfigurationError(f"eta1 must be > 0 for decaying noise (DIFSTAT), got {eta1}")

    amplitudes = amplitude_scale * np.arange(1, K + 1, dtype=float) ** (-amplitude_decay)
    amplitudes.setflags(write=False)
    mass = float(np.sum(amplitudes ** 2))
    kappa = 0.0 if kind == "additive" else mass
    return NoiseModel(
        K=K,
        kind=kind,
        amplitudes=amplitudes,
        kappa=kappa,
        ell=mass,
        eta1=eta1,
        amplitude_scale=amplitude_scale,
        amplitude_decay=amplitude_decay,
        seed=seed,
    )


def diffusion(t: float, state, model: NoiseModel, basis: ModeSet) -> np.ndarray:
    """
    Spectral coefficients of σ^k(t, u) for k = 1..K.

    Args:
        t: Time
        state: SpectralState (or coefficients) on `basis`
        model: Noise family
        basis: Galerkin mode set

    Returns:
        Array of shape (K, n); row k-1 holds (σ^k, v_j)
    """
    c = coefficients(state)
    if model.kind == "additive":
        sigma = np.zeros((model.K, basis.n))
        rows = np.arange(model.K)
        sigma[rows, rows % basis.n] = model.amplitudes
        return sigma
    return model.envelope(t) * np.outer(model.amplitudes, c)


def stokes_lift_diffusion(sigma_coeffs: np.ndarray, basis: ModeSet) -> np.ndarray:
    """σ̃^k_j = σ^k_j / λ_j, the modified Stokes lift of every direction."""
    return np.asarray(sigma_coeffs, dtype=float) / basis.lambdas[None, :]


def ito_correction(sigma_coeffs: np.ndarray, basis: ModeSet) -> float:
    """Σ_k ‖σ̃^k‖_V² = Σ_k Σ_j (σ^k_j)²/λ_j."""
    sigma = np.asarray(sigma_coeffs, dtype=float)
    return float(np.sum(sigma * sigma / basis.lambdas[None, :]))


def growth_ratio(t: float, state, model: NoiseModel, basis: ModeSet) -> float:
    """Σ_k ‖σ^k(t,u)‖₂² / (1 + ‖u‖_V²)."""
    c = coefficients(state)
    sigma = diffusion(t, c, model, basis)
    return float(np.sum(sigma * sigma) / (1.0 + np.dot(basis.lambdas, c * c)))
