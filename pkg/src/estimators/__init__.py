"""
Monte Carlo ensembles and the quantitative energy and stability checks.
"""
from src.estimators.budget import BudgetCheck, apriori_budget_check, linear_energy, linear_second_moments
from src.estimators.ensemble import EnsembleStats, aggregate, run_ensemble
from src.estimators.stability import (
    AlphaConstants,
    DecayTarget,
    StabilityReport,
    decay_target,
    estimate_alpha_constants,
    fit_decay,
)
from src.estimators.survey import SurveyRow, monotonicity_survey

__all__ = [
    "AlphaConstants",
    "BudgetCheck",
    "DecayTarget",
    "EnsembleStats",
    "StabilityReport",
    "SurveyRow",
    "aggregate",
    "apriori_budget_check",
    "decay_target",
    "estimate_alpha_constants",
    "fit_decay",
    "linear_energy",
    "linear_second_moments",
    "monotonicity_survey",
    "run_ensemble",
]
