"""
Divergence-free spectral function space on the 2-torus.
"""
from src.field.basis import DivFreeMode, ModeSet, PhysicalParams, build_basis
from src.field.grid import GridTensorField, SpectralGrid, project, spectral_grid, to_grid
from src.field.norms import (
    grad_l2_sq,
    inner_v,
    korn_ratio,
    norm_a_l4,
    norm_h,
    norm_v,
    norm_v_sq,
    riesz_stokes,
)
from src.field.state import SpectralState, load_state, save_state

__all__ = [
    "DivFreeMode",
    "GridTensorField",
    "ModeSet",
    "PhysicalParams",
    "SpectralGrid",
    "SpectralState",
    "build_basis",
    "grad_l2_sq",
    "inner_v",
    "korn_ratio",
    "load_state",
    "norm_a_l4",
    "norm_h",
    "norm_v",
    "norm_v_sq",
    "project",
    "riesz_stokes",
    "save_state",
    "spectral_grid",
    "to_grid",
]
