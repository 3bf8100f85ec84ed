"""
Explicit Euler–Maruyama integration of the Galerkin coefficient SDE.

In eigen-coordinates λ_j dc_j = (f(U), v_j) dt + Σ_k (σ^k, v_j) dβ_k, so one step is
    c'_j = c_j + λ_j^{-1} [ f_j dt + Σ_k σ^k_j Δβ_k ]
with the nonlinear part of f multiplied by φ_N(‖U‖_V).
"""
import logging
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional

import numpy as np

from src.core.errors import DivergedStateError
from src.field.grid import SpectralGrid, spectral_grid
from src.field.state import SpectralState, coefficients
from src.integrator.config import SimConfig, initial_state
from src.integrator.cutoff import cutoff_value
from src.noise.diffusion import diffusion, ito_correction
from src.noise.wiener import INCREMENTS, WienerIncrement, path_stream, sample_increment
from src.operators.drift import DriftBreakdown, GridFields, drift_on_grid

logger = logging.getLogger(__name__)

# A path is abandoned once ‖U‖_V exceeds this multiple of (‖U₀‖_V + 1).
DIVERGENCE_FACTOR = 10.0


@dataclass
class PathRecord:
    """Strided samples of one path plus diagnostics accumulated at full step resolution."""

    path_index: int
    times: np.ndarray
    states: np.ndarray
    energy_v: np.ndarray
    a_l4: np.ndarray
    grad_l2: np.ndarray
    w14: np.ndarray
    ito_residual: np.ndarray
    sup_energy_v: np.ndarray
    int_a_l4: np.ndarray
    int_grad_l2: np.ndarray
    int_w14: np.ndarray
    cutoff_min: np.ndarray
    diverged: bool = False
    diverged_at: Optional[float] = None

    @property
    def n_saved(self) -> int:
        return self.times.shape[0]

    def state_at(self, index: int) -> SpectralState:
        return SpectralState(self.states[index], float(self.times[index]))


class StepResult(NamedTuple):
    coeffs: np.ndarray
    drift: DriftBreakdown
    sigma: np.ndarray
    cutoff: float
    fields: GridFields


def _step(
    c: np.ndarray,
    t: float,
    dt: float,
    config: SimConfig,
    dbeta: np.ndarray,
    grid: SpectralGrid,
) -> StepResult:
    basis = config.basis
    phi = cutoff_value(float(np.sqrt(np.dot(basis.lambdas, c * c))), config.cutoff)
    nonlinear = config.nonlinear and phi > 0.0
    drift, fields = drift_on_grid(c, t, config.params, config.force, grid, nonlinear=nonlinear)
    sigma = diffusion(t, c, config.noise, basis)
    stochastic = dbeta @ sigma
    new = c + (drift.total(phi) * dt + stochastic) / basis.lambdas
    if not np.all(np.isfinite(new)):
        raise DivergedStateError(f"non-finite state after step at t={t:g}")
    return StepResult(new, drift, sigma, phi, fields)


def em_step(
    state: SpectralState,
    t: float,
    dt: float,
    config: SimConfig,
    increment: WienerIncrement,
) -> SpectralState:
    """
    Advance one Euler–Maruyama step.

    Args:
        state: Current state (finite)
        t: Current time
        dt: Step size
        config: Simulation configuration
        increment: Wiener increments for this step (K = config.noise.K)

    Returns:
        State at t + dt

    Raises:
        DivergedStateError: If the drift or the new state is non-finite
    """
    grid = spectral_grid(config.basis, config.M)
    result = _step(coefficients(state), t, dt, config, increment.dbeta, grid)
    return SpectralState(result.coeffs, t + dt)


@dataclass
class _Recorder:
    """Collects strided rows while integrals and extrema run at every step."""

    times: List[float] = field(default_factory=list)
    states: List[np.ndarray] = field(default_factory=list)
    rows: List[tuple] = field(default_factory=list)

    def save(self, t: float, c: np.ndarray, row: tuple) -> None:
        self.times.append(t)
        self.states.append(c.copy())
        self.rows.append(row)

    def build(self, path_index: int, diverged: bool, diverged_at: Optional[float]) -> PathRecord:
        columns = np.array(self.rows, dtype=float).reshape(-1, 10).T
        return PathRecord(
            path_index=path_index,
            times=np.array(self.times),
            states=np.array(self.states),
            energy_v=columns[0],
            a_l4=columns[1],
            grad_l2=columns[2],
            w14=columns[3],
            ito_residual=columns[4],
            sup_energy_v=columns[5],
            int_a_l4=columns[6],
            int_grad_l2=columns[7],
            int_w14=columns[8],
            cutoff_min=columns[9],
            diverged=diverged,
            diverged_at=diverged_at,
        )


def _grid_diagnostics(fields: GridFields, grid: SpectralGrid) -> tuple:
    u, G, A = fields
    A2 = np.sum(A * A, axis=(0, 1))
    u2 = np.sum(u * u, axis=0)
    g2 = np.sum(G * G, axis=(0, 1))
    return grid.integrate(A2 * A2), grid.integrate(u2 * u2 + g2 * g2)


def simulate_path(config: SimConfig, path_index: int) -> PathRecord:
    """
    Integrate one path from U₀ to T_end.

    Diagnostics are evaluated at every step and subsampled every `save_stride`
    steps; the discrete Itô residual accumulates
        Δ‖U‖_V² - [2(f,U)dt + 2Σ_k(σ^k,U)Δβ_k + Σ_k‖σ̃^k‖_V² dt].
    Divergence is recorded on the returned record, never raised.

    Args:
        config: Validated simulation configuration
        path_index: Ensemble index keying the increment stream

    Returns:
        PathRecord
    """
    config.require_valid()
    basis = config.basis
    grid = spectral_grid(basis, config.M)
    lambdas = basis.lambdas
    k2 = basis.k2
    rng = path_stream(config.noise.seed, path_index, INCREMENTS)

    c = initial_state(config, path_index).coeffs.copy()
    energy = float(np.dot(lambdas, c * c))
    guard = DIVERGENCE_FACTOR * (np.sqrt(energy) + 1.0)
    recorder = _Recorder()

    residual = 0.0
    sup_energy = energy
    integrals = np.zeros(3)
    previous = None
    cutoff_min = 1.0
    diverged, diverged_at = False, None
    n_steps = config.n_steps
    dt = config.dt

    for m in range(n_steps + 1):
        t = m * dt
        result = None
        if m < n_steps:
            try:
                dbeta = sample_increment(dt, config.noise.K, rng).dbeta
                result = _step(c, t, dt, config, dbeta, grid)
            except DivergedStateError as e:
                logger.warning(f"Path {path_index} diverged at t={t:g}: {e}")
                diverged, diverged_at = True, t
        fields = result.fields if result is not None else GridFields(*grid.synthesize(c))

        a4, w4 = _grid_diagnostics(fields, grid)
        current = np.array([a4, float(np.dot(k2, c * c)), w4])
        if previous is not None:
            integrals += 0.5 * dt * (previous + current)
        previous = current
        sup_energy = max(sup_energy, energy)

        last = result is None
        if m % config.save_stride == 0 or last:
            recorder.save(
                t,
                c,
                (energy, a4, current[1], w4, residual, sup_energy, *integrals, cutoff_min),
            )
        if last:
            break

        new = result.coeffs
        new_energy = float(np.dot(lambdas, new * new))
        predicted = (
            2.0 * float(np.dot(result.drift.total(result.cutoff), c)) * dt
            + 2.0 * float(np.dot(dbeta @ result.sigma, c))
            + ito_correction(result.sigma, basis) * dt
        )
        residual += (new_energy - energy) - predicted
        cutoff_min = min(cutoff_min, result.cutoff)
        c, energy = new, new_energy

        if np.sqrt(energy) > guard:
            logger.warning(f"Path {path_index} exceeded the divergence guard at t={t + dt:g}")
            diverged, diverged_at = True, t + dt
            recorder.save(
                t + dt,
                c,
                (energy, np.nan, np.nan, np.nan, residual, max(sup_energy, energy), *integrals, cutoff_min),
            )
            break

    return recorder.build(path_index, diverged, diverged_at)
