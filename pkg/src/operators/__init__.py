"""
Drift assembly, trilinear form and monotone operator of the Galerkin system.
"""
from src.operators.drift import DriftBreakdown, assemble_drift, q_operator, trilinear_b
from src.operators.forcing import ForceModel, mode_profile, zero_force
from src.operators.identities import (
    BasisResiduals,
    PairingResiduals,
    basis_exactness,
    energy_pairing_identities,
    gap_scale,
    monotonicity_gap,
)

__all__ = [
    "BasisResiduals",
    "DriftBreakdown",
    "ForceModel",
    "PairingResiduals",
    "assemble_drift",
    "basis_exactness",
    "energy_pairing_identities",
    "gap_scale",
    "mode_profile",
    "monotonicity_gap",
    "q_operator",
    "trilinear_b",
    "zero_force",
]
