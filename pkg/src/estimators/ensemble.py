"""
Monte Carlo ensembles: a process pool over path indices and the pathwise-first reduction.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from src.core.errors import EnsembleError
from src.field.basis import PhysicalParams
from src.integrator.config import SimConfig
from src.integrator.stepper import PathRecord, simulate_path

logger = logging.getLogger(__name__)


def run_ensemble(config: SimConfig, n_paths: int, workers: int = 1, first_index: int = 0) -> List[PathRecord]:
    """
    Simulate paths first_index, ..., first_index + n_paths - 1.

    Results come back ordered by path index, and each path draws from its own
    stream, so the output does not depend on `workers`.

    Args:
        config: Validated simulation configuration
        n_paths: Ensemble size (≥ 1)
        workers: Worker processes; 1 runs in-process
        first_index: Index of the first path

    Returns:
        PathRecords ordered by path index

    Raises:
        EnsembleError: If a worker fails
    """
    if n_paths < 1:
        raise EnsembleError(f"ensemble size must be >= 1, got {n_paths}")
    config.require_valid()
    indices = list(range(first_index, first_index + n_paths))
    logger.info(f"Running {n_paths} paths on {workers} worker(s): n_max={config.n_max}, M={config.M}, dt={config.dt}")

    try:
        if workers <= 1:
            records = [simulate_path(config, i) for i in indices]
        else:
            chunksize = max(1, n_paths // (4 * workers))
            with ProcessPoolExecutor(max_workers=workers) as pool:
                records = list(pool.map(simulate_path, [config] * n_paths, indices, chunksize=chunksize))
    except Exception as e:
        logger.error(f"Ensemble run failed: {e}", exc_info=True)
        raise EnsembleError(f"ensemble run failed: {e}") from e

    n_diverged = sum(r.diverged for r in records)
    logger.info(f"Ensemble finished: {n_paths - n_diverged} completed, {n_diverged} diverged")
    return records


def _mean_se(values: np.ndarray):
    # rows are stacked in path-index order, so the reduction order and result do not depend on scheduling
    mean = np.mean(values, axis=0)
    if values.shape[0] < 2:
        return mean, np.zeros_like(mean)
    se = np.std(values, axis=0, ddof=1) / np.sqrt(values.shape[0])
    return mean, se


@dataclass
class EnsembleStats:
    """
    Time-indexed ensemble estimates over the non-diverged paths.

    Every 𝔼sup and 𝔼∫ quantity is a pathwise sup or integral first, then a mean.
    `*_se` arrays hold standard errors of the matching mean.
    """

    times: np.ndarray
    n_paths: int
    n_diverged: int
    mean_energy_v: np.ndarray
    se_energy_v: np.ndarray
    mean_sup_energy: np.ndarray
    se_sup_energy: np.ndarray
    budget_a: np.ndarray
    se_budget_a: np.ndarray
    budget_grad: np.ndarray
    se_budget_grad: np.ndarray
    mean_w14: np.ndarray
    se_w14: np.ndarray
    moment_p: float
    mean_moment: np.ndarray
    se_moment: np.ndarray
    mean_ito_residual: np.ndarray
    se_ito_residual: np.ndarray
    energy_paths: np.ndarray = field(repr=False)
    path_indices: np.ndarray = field(repr=False)

    @property
    def n_total(self) -> int:
        return self.n_paths + self.n_diverged

    @property
    def diverged_fraction(self) -> float:
        return self.n_diverged / self.n_total

    def final_energies(self) -> np.ndarray:
        return self.energy_paths[:, -1]

    def csv_columns(self) -> dict:
        """Columns of the per-time CSV block, in output order."""
        return {
            "t": self.times,
            "mean_energy_v": self.mean_energy_v,
            "se_energy_v": self.se_energy_v,
            "mean_sup_energy": self.mean_sup_energy,
            "budget_a": self.budget_a,
            "budget_grad": self.budget_grad,
            "mean_w14": self.mean_w14,
            f"moment_{self.moment_p:g}": self.mean_moment,
            "mean_ito_residual": self.mean_ito_residual,
        }


def aggregate(paths: Sequence[PathRecord], params: PhysicalParams, moment_p: float = 4.0) -> EnsembleStats:
    """
    Reduce path records to ensemble statistics.

    Args:
        paths: Path records sharing one time grid
        params: Constitutive constants (weights of the budgets)
        moment_p: Exponent p of the moment 𝔼‖U(t)‖_V^p

    Returns:
        EnsembleStats over the non-diverged paths

    Raises:
        EnsembleError: If fewer than two paths completed or time grids differ
    """
    paths = sorted(paths, key=lambda p: p.path_index)
    if not paths:
        raise EnsembleError("no paths to aggregate")
    completed = [p for p in paths if not p.diverged]
    n_diverged = len(paths) - len(completed)
    if n_diverged:
        logger.warning(f"{n_diverged}/{len(paths)} paths diverged and are excluded from the estimates")
    if not completed:
        raise EnsembleError(f"all {len(paths)} paths diverged")
    if len(completed) < 2:
        raise EnsembleError(f"need at least 2 completed paths, got {len(completed)}")

    times = completed[0].times
    for p in completed[1:]:
        if p.times.shape != times.shape or not np.array_equal(p.times, times):
            raise EnsembleError(f"path {p.path_index} has a different time grid than path {completed[0].path_index}")

    def stack(name: str) -> np.ndarray:
        return np.stack([getattr(p, name) for p in completed])

    energy = stack("energy_v")
    mean_energy, se_energy = _mean_se(energy)
    mean_sup, se_sup = _mean_se(stack("sup_energy_v"))
    budget_a, se_a = _mean_se(0.5 * params.beta * stack("int_a_l4"))
    budget_grad, se_grad = _mean_se(2.0 * params.mu * stack("int_grad_l2"))
    mean_w14, se_w14 = _mean_se(stack("int_w14"))
    moment, se_moment = _mean_se(energy ** (0.5 * moment_p))
    residual, se_residual = _mean_se(stack("ito_residual"))

    return EnsembleStats(
        times=times.copy(),
        n_paths=len(completed),
        n_diverged=n_diverged,
        mean_energy_v=mean_energy,
        se_energy_v=se_energy,
        mean_sup_energy=mean_sup,
        se_sup_energy=se_sup,
        budget_a=budget_a,
        se_budget_a=se_a,
        budget_grad=budget_grad,
        se_budget_grad=se_grad,
        mean_w14=mean_w14,
        se_w14=se_w14,
        moment_p=moment_p,
        mean_moment=moment,
        se_moment=se_moment,
        mean_ito_residual=residual,
        se_ito_residual=se_residual,
        energy_paths=energy,
        path_indices=np.array([p.path_index for p in completed]),
    )


def split_halves(paths: Sequence[PathRecord]):
    """Even/odd path-index halves, used to check estimator consistency."""
    paths = list(paths)
    return paths[0::2], paths[1::2]
