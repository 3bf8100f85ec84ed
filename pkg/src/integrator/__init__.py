"""
Euler–Maruyama integration of the cut-off Galerkin system.
"""
from src.integrator.config import InitialLaw, SimConfig, expected_initial_energy, initial_state
from src.integrator.cutoff import CutoffSpec, cutoff_value
from src.integrator.export import PATH_COLUMNS, write_path_csv
from src.integrator.holder import HolderEstimate, holder_parts, holder_seminorm
from src.integrator.stepper import PathRecord, em_step, simulate_path

__all__ = [
    "CutoffSpec",
    "HolderEstimate",
    "InitialLaw",
    "PATH_COLUMNS",
    "PathRecord",
    "SimConfig",
    "cutoff_value",
    "em_step",
    "expected_initial_energy",
    "holder_parts",
    "holder_seminorm",
    "initial_state",
    "simulate_path",
    "write_path_csv",
]
