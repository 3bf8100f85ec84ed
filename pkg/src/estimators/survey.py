"""
Monotonicity survey of 𝒬 over a grid of constitutive parameter sets.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from src.field.basis import ModeSet, PhysicalParams
from src.operators.identities import gap_scale, monotonicity_gap

logger = logging.getLogger(__name__)

GAP_RTOL = 1e-9


@dataclass
class SurveyRow:
    params: PhysicalParams
    inside_region: bool
    samples: int
    min_gap: float
    min_scaled_gap: float

    @property
    def passed(self) -> Optional[bool]:
        """None outside the monotonicity region, where nothing is asserted."""
        if not self.inside_region:
            return None
        return self.min_scaled_gap >= -GAP_RTOL

    def as_dict(self) -> dict:
        return {
            "mu": self.params.mu,
            "alpha1": self.params.alpha1,
            "alpha2": self.params.alpha2,
            "beta": self.params.beta,
            "inside_region": self.inside_region,
            "samples": self.samples,
            "min_gap": self.min_gap,
            "min_scaled_gap": self.min_scaled_gap,
            "passed": "n/a" if self.passed is None else self.passed,
        }


def random_pair(basis: ModeSet, rng: np.random.Generator):
    """
    Two states with |k|^{-2} spectra and log-uniform amplitudes in [0.1, 3].

    The amplitude range reaches states where the cubic term dominates.
    """
    shape = basis.k2 ** -1.0
    scales = 10.0 ** rng.uniform(-1.0, np.log10(3.0), size=2)
    u = scales[0] * shape * rng.standard_normal(basis.n)
    y = scales[1] * shape * rng.standard_normal(basis.n)
    return u, y


def monotonicity_survey(
    params_grid: Sequence[PhysicalParams],
    sample_count: int,
    basis: ModeSet,
    M: int,
    rng: np.random.Generator,
) -> List[SurveyRow]:
    """
    Minimum monotonicity gap per parameter set over random state pairs.

    The same pairs are reused for every parameter set. Gaps are also reported
    divided by 1 + ‖u‖_{W^{1,4}}³ + ‖y‖_{W^{1,4}}³.

    Args:
        params_grid: Constitutive parameter sets
        sample_count: Pairs per set
        basis: Galerkin mode set
        M: Grid resolution
        rng: Generator supplying the pairs

    Returns:
        One SurveyRow per parameter set
    """
    pairs = [random_pair(basis, rng) for _ in range(sample_count)]
    scales = [gap_scale(u, y, basis, M) for u, y in pairs]
    rows = []
    for params in params_grid:
        gaps = np.array([monotonicity_gap(u, y, params, basis, M) for u, y in pairs])
        scaled = gaps / np.array(scales)
        row = SurveyRow(
            params=params,
            inside_region=params.monotone_ok,
            samples=sample_count,
            min_gap=float(np.min(gaps)) if sample_count else 0.0,
            min_scaled_gap=float(np.min(scaled)) if sample_count else 0.0,
        )
        logger.info(
            f"mu={params.mu:g} alpha1={params.alpha1:g} alpha2={params.alpha2:g} beta={params.beta:g}: "
            f"min gap {row.min_gap:.3e} (scaled {row.min_scaled_gap:.3e}), inside={row.inside_region}"
        )
        rows.append(row)
    return rows


def boundary_params(mu: float, beta: float, alpha1: float) -> PhysicalParams:
    """Parameter set with 3α₁² + 4(α₁+α₂)² = 24μβ, taking α₁+α₂ ≥ 0."""
    rest = 24.0 * mu * beta - 3.0 * alpha1 ** 2
    if rest < 0.0:
        raise ValueError(f"alpha1={alpha1} lies outside the region for mu={mu}, beta={beta}")
    return PhysicalParams(mu=mu, alpha1=alpha1, alpha2=float(np.sqrt(rest / 4.0)) - alpha1, beta=beta)


def default_params_grid() -> List[PhysicalParams]:
    """Four interior sets, one boundary set and one set outside the region."""
    return [
        PhysicalParams(mu=1.0, alpha1=0.0, alpha2=0.0, beta=1.0),
        PhysicalParams(mu=1.0, alpha1=0.5, alpha2=-0.5, beta=1.0),
        PhysicalParams(mu=0.5, alpha1=1.0, alpha2=0.2, beta=2.0),
        PhysicalParams(mu=2.0, alpha1=0.3, alpha2=1.0, beta=0.5),
        boundary_params(mu=1.0, beta=1.0, alpha1=1.0),
        PhysicalParams(mu=0.1, alpha1=2.0, alpha2=1.0, beta=0.1),
    ]
