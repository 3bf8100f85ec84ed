"""
Truncated Q-Wiener increments and diffusion coefficient families.
"""
from src.noise.diffusion import (
    NOISE_KINDS,
    NoiseModel,
    build_noise_model,
    diffusion,
    growth_ratio,
    ito_correction,
    stokes_lift_diffusion,
)
from src.noise.wiener import WienerIncrement, path_stream, sample_increment

__all__ = [
    "NOISE_KINDS",
    "NoiseModel",
    "WienerIncrement",
    "build_noise_model",
    "diffusion",
    "growth_ratio",
    "ito_correction",
    "path_stream",
    "sample_increment",
    "stokes_lift_diffusion",
]
