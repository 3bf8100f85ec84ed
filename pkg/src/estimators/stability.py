"""
Exponential stability of the zero solution: constants, bounds and the decay fit.

Mean-square bound:   𝔼‖U(t)‖_V² ≤ Λ e^{-ηt},  Λ = (𝔼‖U₀‖_V² + C_ℓ/(η₁-η)) e^{C_ℓ/η₁}
Window bound:        𝔼 sup_{[N,N+1]} ‖U‖_V² ≤ Λ' e^{-ηN}
Both need the margin m = 2μ - c_Φ - 2(c_{α₁}² + c_{α₂}²)/β to be positive.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Literal, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import linregress

from src.core.errors import ConfigurationError
from src.estimators.ensemble import EnsembleStats
from src.field.basis import ModeSet, PhysicalParams
from src.field.grid import spectral_grid
from src.integrator.config import SimConfig, expected_initial_energy
from src.operators.drift import drift_on_grid
from src.operators.forcing import zero_force

logger = logging.getLogger(__name__)

ConstantMode = Literal["empirical", "spectral"]

# certification is refused once more than this share of paths diverged
MAX_DIVERGED_FRACTION = 0.01
AS_PASS_FRACTION = 0.95


class AlphaConstants(NamedTuple):
    c_alpha1: float
    c_alpha2: float
    mode: str
    n_states: int


def _young_constant(pairings: np.ndarray, a4: np.ndarray, energies: np.ndarray, beta: float) -> float:
    """Smallest c with |P| ≤ (β/4)‖A‖₄⁴ + (c²/β)‖U‖_V² on every sample."""
    excess = np.maximum(0.0, np.abs(pairings) - 0.25 * beta * a4)
    mask = energies > 0.0
    if not np.any(mask):
        return 0.0
    return float(np.sqrt(beta * np.max(excess[mask] / energies[mask])))


def estimate_alpha_constants(
    states: np.ndarray,
    params: PhysicalParams,
    basis: ModeSet,
    M: int,
    mode: ConstantMode = "empirical",
) -> AlphaConstants:
    """
    Constants c_{α₁}, c_{α₂} entering the stability margin.

    empirical: sharpest constants for which the Young split of the α₁ and α₂
        pairings with U holds on every given state
    spectral:  |α|·max_j |k_j|/√λ_j, from ‖∇U‖₂ ≤ max_j(|k_j|/√λ_j)‖U‖_V

    Args:
        states: Coefficient rows, shape (S, n) (ignored in spectral mode)
        params: Constitutive constants (β > 0)
        basis: Galerkin mode set
        M: Grid resolution
        mode: "empirical" or "spectral"

    Returns:
        AlphaConstants
    """
    if mode == "spectral":
        factor = float(np.max(np.sqrt(basis.k2 / basis.lambdas)))
        return AlphaConstants(abs(params.alpha1) * factor, abs(params.alpha2) * factor, mode, 0)
    if mode != "empirical":
        raise ConfigurationError(f"unknown constant mode {mode!r}")
    if not params.beta > 0.0:
        raise ConfigurationError("empirical alpha constants need beta > 0")

    states = np.atleast_2d(np.asarray(states, dtype=float))
    grid = spectral_grid(basis, M)
    force = zero_force()
    p1, p2, a4, energy = (np.zeros(states.shape[0]) for _ in range(4))
    for i, c in enumerate(states):
        drift, (_, _, A) = drift_on_grid(c, 0.0, params, force, grid)
        A2 = np.sum(A * A, axis=(0, 1))
        p1[i] = np.dot(drift.alpha1_shear, c)
        p2[i] = np.dot(drift.alpha2_term, c)
        a4[i] = grid.integrate(A2 * A2)
        energy[i] = np.dot(basis.lambdas, c * c)
    constants = AlphaConstants(
        _young_constant(p1, a4, energy, params.beta),
        _young_constant(p2, a4, energy, params.beta),
        mode,
        states.shape[0],
    )
    logger.info(f"Empirical constants over {states.shape[0]} states: c_alpha1={constants[0]:.6g}, c_alpha2={constants[1]:.6g}")
    return constants


def stability_margin(params: PhysicalParams, c_phi: float, constants: AlphaConstants) -> float:
    """m = 2μ - c_Φ - 2(c_{α₁}² + c_{α₂}²)/β."""
    if not params.beta > 0.0:
        return -math.inf
    return 2.0 * params.mu - c_phi - 2.0 * (constants.c_alpha1 ** 2 + constants.c_alpha2 ** 2) / params.beta


def stability_lambda(e_u0_v2: float, c_ell: float, eta1: float, eta: float) -> float:
    """Λ = (𝔼‖U₀‖_V² + C_ℓ/(η₁-η)) e^{C_ℓ/η₁}; C_ℓ = 0 allows η₁ = ∞."""
    if not 0.0 < eta < eta1:
        raise ConfigurationError(f"need 0 < eta < eta1, got eta={eta}, eta1={eta1}")
    if c_ell == 0.0:
        return float(e_u0_v2)
    return float((e_u0_v2 + c_ell / (eta1 - eta)) * math.exp(c_ell / eta1))


def window_lambda(
    lam: float,
    c_ell: float,
    eta: float,
    eta1: float,
    bdg_constant: float = 3.0,
    lift_constant: float = 1.0,
) -> float:
    """Λ' = 2(Λ + C_ℓ(2K²+C)/η₁ + C_ℓ(2K²+C)Λ/(η+η₁)), K the BDG constant."""
    if c_ell == 0.0:
        return 2.0 * lam
    weight = c_ell * (2.0 * bdg_constant ** 2 + lift_constant)
    return float(2.0 * (lam + weight / eta1 + weight * lam / (eta + eta1)))


@dataclass(frozen=True)
class DecayTarget:
    """Everything the bounds need besides the ensemble."""

    eta: float
    eta1: float
    c_ell: float
    e_u0_v2: float
    margin: float
    constants: AlphaConstants
    as_lambda: float
    bdg_constant: float = 3.0

    @property
    def lambda_bound(self) -> float:
        return stability_lambda(self.e_u0_v2, self.c_ell, self.eta1, self.eta)

    @property
    def window_bound(self) -> float:
        return window_lambda(self.lambda_bound, self.c_ell, self.eta, self.eta1, self.bdg_constant)


@dataclass
class StabilityReport:
    eta_hat: float
    eta_hat_stderr: float
    window: Tuple[float, float]
    truncated: bool
    n_paths: int
    n_diverged: int
    eta_target: Optional[float] = None
    eta1: Optional[float] = None
    margin: Optional[float] = None
    c_alpha1: Optional[float] = None
    c_alpha2: Optional[float] = None
    constant_mode: Optional[str] = None
    lambda_bound: Optional[float] = None
    bound_violations: int = 0
    window_bound: Optional[float] = None
    window_bound_violations: int = 0
    as_lambda: Optional[float] = None
    as_fraction: Optional[float] = None
    reasons: List[str] = field(default_factory=list)

    @property
    def certified(self) -> bool:
        """Mean-square stability certified: no reason was recorded against it."""
        return self.eta_target is not None and not self.reasons

    @property
    def as_ok(self) -> bool:
        return self.as_fraction is not None and self.as_fraction >= AS_PASS_FRACTION

    def as_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "reasons"}
        out["certified"] = self.certified
        out["as_ok"] = self.as_ok
        out["reasons"] = "; ".join(self.reasons) if self.reasons else "none"
        return out


def _window_slice(times: np.ndarray, energies: np.ndarray, window: Tuple[float, float]):
    t0, t1 = window
    inside = np.flatnonzero((times >= t0) & (times <= t1))
    positive = energies[inside] > 0.0
    truncated = not np.all(positive)
    if truncated:
        # keep the leading stretch on which the log is defined
        stop = int(np.argmin(positive))
        inside = inside[:stop]
    return inside, truncated


def fit_decay(
    stats: EnsembleStats,
    window: Tuple[float, float],
    target: Optional[DecayTarget] = None,
    z: float = 3.0,
) -> StabilityReport:
    """
    Fit log 𝔼‖U(t)‖_V² on the window and, given a target, test the stability bounds.

    Args:
        stats: Ensemble statistics
        window: (t0, T) fitting window
        target: Bound constants; None fits the rate only
        z: Width of the standard-error band used when counting violations

    Returns:
        StabilityReport

    Raises:
        ConfigurationError: If fewer than two positive samples fall in the window
    """
    times = stats.times
    inside, truncated = _window_slice(times, stats.mean_energy_v, window)
    if inside.size < 2:
        raise ConfigurationError(f"window {window} holds fewer than two samples with positive mean energy")
    if truncated:
        logger.warning(f"Fit window truncated to [{times[inside[0]]:g}, {times[inside[-1]]:g}]: non-positive energies")
    fit = linregress(times[inside], np.log(stats.mean_energy_v[inside]))
    report = StabilityReport(
        eta_hat=float(-fit.slope),
        eta_hat_stderr=float(fit.stderr),
        window=(float(times[inside[0]]), float(times[inside[-1]])),
        truncated=truncated,
        n_paths=stats.n_paths,
        n_diverged=stats.n_diverged,
    )
    if target is None:
        return report

    lam = target.lambda_bound
    bound = lam * np.exp(-target.eta * times)
    lower = stats.mean_energy_v - z * stats.se_energy_v
    report.eta_target = target.eta
    report.eta1 = target.eta1
    report.margin = target.margin
    report.c_alpha1 = target.constants.c_alpha1
    report.c_alpha2 = target.constants.c_alpha2
    report.constant_mode = target.constants.mode
    report.lambda_bound = lam
    report.bound_violations = int(np.sum(lower > bound))

    report.window_bound = target.window_bound
    report.window_bound_violations = _window_violations(stats, target, z)

    report.as_lambda = target.as_lambda
    report.as_fraction = as_fraction(stats, target.as_lambda)

    if not target.margin > 0.0:
        report.reasons.append(f"margin m={target.margin:.6g} is not positive")
    if not report.eta_hat > 0.0:
        report.reasons.append(f"fitted rate {report.eta_hat:.6g} is not positive")
    if report.bound_violations:
        report.reasons.append(f"{report.bound_violations} time points exceed Lambda e^(-eta t)")
    if report.window_bound_violations:
        report.reasons.append(f"{report.window_bound_violations} unit windows exceed Lambda' e^(-eta N)")
    if stats.diverged_fraction > MAX_DIVERGED_FRACTION:
        report.reasons.append(f"{stats.n_diverged}/{stats.n_total} paths diverged")
    if report.reasons:
        logger.warning(f"Stability certification withheld: {'; '.join(report.reasons)}")
    return report


def _window_violations(stats: EnsembleStats, target: DecayTarget, z: float) -> int:
    """Unit windows [N, N+1] whose 𝔼sup estimate exceeds Λ'e^{-ηN} beyond the band."""
    times = stats.times
    violations = 0
    for N in range(int(math.floor(times[-1]))):
        inside = (times >= N) & (times <= N + 1)
        if np.count_nonzero(inside) < 2:
            continue
        sups = np.max(stats.energy_paths[:, inside], axis=1)
        se = np.std(sups, ddof=1) / np.sqrt(sups.size) if sups.size > 1 else 0.0
        if np.mean(sups) - z * se > target.window_bound * math.exp(-target.eta * N):
            violations += 1
    return violations


def as_fraction(stats: EnsembleStats, as_lambda: float) -> float:
    """
    Share of the ensemble with (1/T) log ‖U(T)‖_V ≤ -as_lambda.

    Diverged paths count as failures.
    """
    T = float(stats.times[-1])
    final = stats.final_energies()
    with np.errstate(divide="ignore"):
        rates = 0.5 * np.log(final) / T
    return float(np.count_nonzero(rates <= -as_lambda) / stats.n_total)


def decay_target(
    config: SimConfig,
    constants: AlphaConstants,
    eta_fraction: float = 0.5,
    as_lambda_fraction: float = 0.25,
    bdg_constant: float = 3.0,
) -> DecayTarget:
    """
    Choose η = eta_fraction·min(m, η₁) and the pathwise rate as_lambda_fraction·η.

    η₁ is the noise decay rate (and the force rate when the force decays too);
    without noise or force it is unbounded.
    """
    if not 0.0 < eta_fraction < 1.0:
        raise ConfigurationError(f"eta_fraction must lie in (0, 1), got {eta_fraction}")
    noise, force = config.noise, config.force
    rates = []
    if noise.c_ell > 0.0:
        if noise.kind != "decaying_multiplicative":
            raise ConfigurationError(f"the stability bound needs decaying noise, got {noise.kind!r}")
        rates.append(noise.eta1)
    if force.kind == "decaying":
        rates.append(force.eta1)
    elif force.kind != "zero":
        raise ConfigurationError(f"the stability bound needs a zero or decaying force, got {force.kind!r}")
    eta1 = min(rates) if rates else math.inf

    margin = stability_margin(config.params, force.c_phi, constants)
    eta = eta_fraction * min(max(margin, 0.0), eta1)
    if not eta > 0.0:
        # no admissible η; report against a nominal one
        eta = eta_fraction * min(eta1, 1.0)
    return DecayTarget(
        eta=eta,
        eta1=eta1,
        c_ell=noise.c_ell,
        e_u0_v2=expected_initial_energy(config),
        margin=margin,
        constants=constants,
        as_lambda=as_lambda_fraction * eta,
        bdg_constant=bdg_constant,
    )


def ensemble_states(records: Sequence, max_states: int = 2000) -> np.ndarray:
    """Saved states of the completed paths, thinned evenly to at most `max_states` rows."""
    rows = [r.states for r in records if not r.diverged and r.states.size]
    if not rows:
        raise ConfigurationError("no completed path states to sample")
    states = np.concatenate(rows)
    if states.shape[0] > max_states:
        states = states[np.linspace(0, states.shape[0] - 1, max_states).astype(int)]
    return states
