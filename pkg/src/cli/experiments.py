"""
One runner per experiment kind.

Each runner fills a Report and returns an exit code:
    0 pass, 1 configuration error, 2 acceptance failure, 3 divergence-dominated ensemble.
"""
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, List

import numpy as np

from src.cli.manifest import ExperimentConfig, RunManifest
from src.cli.report import Report, write_metadata
from src.core.errors import ConfigurationError, EnsembleError
from src.estimators.budget import (
    apriori_budget_check,
    linear_energy,
    linear_grad_budget,
    relative_spread,
)
from src.estimators.ensemble import aggregate, run_ensemble
from src.estimators.stability import (
    decay_target,
    ensemble_states,
    estimate_alpha_constants,
    fit_decay,
)
from src.estimators.survey import default_params_grid, monotonicity_survey, random_pair
from src.field.norms import norm_v, riesz_stokes
from src.integrator.config import SimConfig, expected_initial_energy
from src.integrator.export import write_path_csv
from src.integrator.holder import holder_parts
from src.noise.wiener import SURVEY, path_stream
from src.operators.drift import trilinear_b
from src.operators.identities import basis_exactness, energy_pairing_identities

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_CONFIG = 1
EXIT_FAIL = 2
EXIT_DIVERGED = 3

# an ensemble in which more than this share diverged yields no estimates
DIVERGENCE_DOMINATED = 0.5

IDENTITY_RTOL = 1e-8
ANTISYMMETRY_RTOL = 1e-10
GRAM_ATOL = 1e-10
RIESZ_ATOL = 1e-12


@dataclass
class ExperimentOutcome:
    exit_code: int
    report: Report
    summary: str
    artifacts: List[Path] = field(default_factory=list)


def _describe(report: Report, manifest: RunManifest) -> None:
    sim = manifest.sim
    report.add("kind", manifest.kind)
    report.add("config_hash", manifest.config_hash)
    report.add("seed", manifest.seed)
    report.add("n_paths", manifest.n_paths)
    report.add("n_max", sim.n_max)
    report.add("M", sim.M)
    report.add("modes", sim.basis.n)
    report.add("dt", sim.dt)
    report.add("T_end", sim.T_end)
    report.update(sim.params.model_dump(), prefix="params.")
    report.add("fosdick_ok", sim.params.fosdick_ok)
    report.add("monotone_ok", sim.params.monotone_ok)
    report.add("noise.kind", sim.noise.kind)
    report.add("noise.K", sim.noise.K)
    report.add("noise.kappa", sim.noise.kappa)
    report.add("noise.ell", sim.noise.ell)
    report.add("noise.tail_mass", sim.noise.tail_mass())
    report.add("force.kind", sim.force.kind)
    report.add("cutoff.N", sim.cutoff.N)


def _dominated(n_diverged: int, n_total: int) -> bool:
    return n_diverged > DIVERGENCE_DOMINATED * n_total


def _ensemble(sim: SimConfig, manifest: RunManifest):
    records = run_ensemble(sim, manifest.n_paths, workers=manifest.workers)
    n_diverged = sum(r.diverged for r in records)
    if _dominated(n_diverged, len(records)):
        return records, None
    return records, aggregate(records, sim.params, moment_p=manifest.config.estimators.moment_p)


def _divergence_outcome(report: Report, records) -> ExperimentOutcome:
    n_diverged = sum(r.diverged for r in records)
    report.add("n_diverged", n_diverged)
    diverged = [{"path_index": r.path_index, "diverged_at": r.diverged_at} for r in records if r.diverged]
    report.add_rows("diverged", diverged)
    summary = f"{n_diverged}/{len(records)} paths diverged"
    logger.warning(f"Divergence-dominated ensemble: {summary}")
    return ExperimentOutcome(EXIT_DIVERGED, report, summary)


def _is_linear_sector(sim: SimConfig) -> bool:
    return not sim.nonlinear and sim.force.kind == "zero" and sim.noise.kind != "decaying_multiplicative"


def run_simulate(manifest: RunManifest, report: Report) -> ExperimentOutcome:
    sim = manifest.sim
    records, stats = _ensemble(sim, manifest)
    paths_dir = manifest.out_dir / "paths"
    artifacts = [write_path_csv(r, paths_dir / f"path_{r.path_index:05d}.csv", manifest.config_hash) for r in records]
    if stats is None:
        outcome = _divergence_outcome(report, records)
        outcome.artifacts = artifacts
        return outcome

    report.add("n_diverged", stats.n_diverged)
    report.add("final.mean_energy_v", stats.mean_energy_v[-1])
    report.add("final.se_energy_v", stats.se_energy_v[-1])
    report.add("final.mean_sup_energy", stats.mean_sup_energy[-1])
    report.add("final.mean_ito_residual", stats.mean_ito_residual[-1])
    report.add("final.se_ito_residual", stats.se_ito_residual[-1])
    if _is_linear_sector(sim):
        oracle = linear_energy(sim, stats.times)
        error = np.max(np.abs(stats.mean_energy_v - oracle) / np.maximum(oracle, 1e-300))
        report.add("linear_oracle.max_rel_error", error)
    columns = stats.csv_columns()
    report.add_table("ensemble", columns)
    return ExperimentOutcome(EXIT_PASS, report, f"{stats.n_paths} paths simulated", artifacts)


def run_identities(manifest: RunManifest, report: Report) -> ExperimentOutcome:
    sim = manifest.sim
    basis, M, params = sim.basis, sim.M, sim.params
    rng = path_stream(manifest.seed, 0, SURVEY)
    rows = []
    for i in range(manifest.config.estimators.identity_states):
        u, y = random_pair(basis, rng)
        z, _ = random_pair(basis, rng)
        scale = 1.0 + norm_v(u, basis) ** 3
        residuals = energy_pairing_identities(u, params, basis, M)
        b_uyz = trilinear_b(u, y, z, basis, M)
        b_uzy = trilinear_b(u, z, y, basis, M)
        rows.append(
            {
                "state": i,
                "convection": abs(residuals.convection) / scale,
                "alpha1_transport": abs(residuals.alpha1_transport) / scale,
                "beta_dissipation": abs(residuals.beta_dissipation) / scale,
                "alpha2_cubic": abs(residuals.alpha2_cubic) / scale,
                "antisymmetry": abs(b_uyz + b_uzy) / (1.0 + abs(b_uyz) + abs(b_uzy)),
                "self_pairing": abs(trilinear_b(u, y, y, basis, M)) / (1.0 + norm_v(u, basis) * norm_v(y, basis) ** 2),
            }
        )

    exact = basis_exactness(basis, M)
    f, g = rng.standard_normal(basis.n), rng.standard_normal(basis.n)
    riesz = abs(float(np.dot(basis.lambdas * riesz_stokes(f, basis), g) - np.dot(f, g)))

    worst = {k: max(r[k] for r in rows) for k in rows[0] if k != "state"}
    report.update(worst, prefix="max.")
    report.add("basis.orthonormality", exact.orthonormality)
    report.add("basis.v_diagonality", exact.v_diagonality)
    report.add("riesz.residual", riesz)
    report.add_rows("identities", rows)

    identities = ("convection", "alpha1_transport", "beta_dissipation", "alpha2_cubic")
    failures = [k for k in identities if worst[k] >= IDENTITY_RTOL]
    if max(worst["antisymmetry"], worst["self_pairing"]) >= ANTISYMMETRY_RTOL:
        failures.append("antisymmetry")
    if max(exact) >= GRAM_ATOL:
        failures.append("basis")
    if riesz >= RIESZ_ATOL:
        failures.append("riesz")
    report.add("passed", not failures)
    if failures:
        return ExperimentOutcome(EXIT_FAIL, report, f"identity residuals too large: {', '.join(failures)}")
    return ExperimentOutcome(EXIT_PASS, report, f"{len(rows)} states, all identities within tolerance")


def run_monotonicity(manifest: RunManifest, report: Report) -> ExperimentOutcome:
    sim = manifest.sim
    params_grid = [sim.params] + default_params_grid()
    rng = path_stream(manifest.seed, 0, SURVEY)
    rows = monotonicity_survey(params_grid, manifest.config.estimators.survey_pairs, sim.basis, sim.M, rng)
    report.add_rows("survey", [r.as_dict() for r in rows])
    failed = [r for r in rows if r.passed is False]
    report.add("inside_region_sets", sum(r.inside_region for r in rows))
    report.add("failed_sets", len(failed))
    report.add("passed", not failed)
    if failed:
        return ExperimentOutcome(EXIT_FAIL, report, f"{len(failed)} parameter sets inside the region show a negative gap")
    return ExperimentOutcome(EXIT_PASS, report, f"{len(rows)} parameter sets surveyed")


def _levels(manifest: RunManifest) -> List[ExperimentConfig]:
    return [manifest.config.at_resolution(n) for n in manifest.config.estimators.levels()]


def run_apriori(manifest: RunManifest, report: Report) -> ExperimentOutcome:
    rows = []
    for config in _levels(manifest):
        sim = config.sim
        records, stats = _ensemble(sim, manifest)
        if stats is None:
            return _divergence_outcome(report, records)
        check = apriori_budget_check(stats, expected_initial_energy(sim))
        row = {
            "n_max": sim.n_max,
            "M": sim.M,
            "n_paths": stats.n_paths,
            "n_diverged": stats.n_diverged,
            "budget_ratio": check.final_ratio,
            "w14_ratio": check.final_w14_ratio,
        }
        if _is_linear_sector(sim) and sim.noise.kind == "additive":
            oracle = linear_grad_budget(sim, float(stats.times[-1]))
            row["grad_budget_rel_error"] = abs(stats.budget_grad[-1] - oracle) / max(oracle, 1e-300)
        rows.append(row)
        report.add_table(
            f"budget_n{sim.n_max}",
            {"t": check.times, "lhs": check.lhs, "ratio": check.ratio, "w14_ratio": check.w14_ratio},
        )

    spread = relative_spread([r["budget_ratio"] for r in rows])
    tolerance = manifest.config.estimators.budget_tolerance
    report.add("budget_ratio.spread", spread)
    report.add("w14_ratio.spread", relative_spread([r["w14_ratio"] for r in rows]))
    report.add("tolerance", tolerance)
    report.add("passed", spread <= tolerance)
    report.add_rows("levels", rows)
    if spread > tolerance:
        return ExperimentOutcome(EXIT_FAIL, report, f"budget ratio spread {spread:.3f} exceeds {tolerance}")
    return ExperimentOutcome(EXIT_PASS, report, f"budget ratio spread {spread:.3f} across {len(rows)} levels")


def run_stability(manifest: RunManifest, report: Report) -> ExperimentOutcome:
    sim = manifest.sim
    knobs = manifest.config.estimators
    records, stats = _ensemble(sim, manifest)
    if stats is None:
        return _divergence_outcome(report, records)

    states = ensemble_states(records)
    constants = estimate_alpha_constants(states, sim.params, sim.basis, sim.M, mode=knobs.constant_mode)
    target = decay_target(sim, constants, knobs.eta_fraction, knobs.as_lambda_fraction, knobs.bdg_constant)
    result = fit_decay(stats, (knobs.window_start, sim.T_end), target)
    report.update(result.as_dict())
    columns = stats.csv_columns()
    columns["bound"] = result.lambda_bound * np.exp(-result.eta_target * stats.times)
    report.add_table("ensemble", columns)

    if result.certified and result.as_ok:
        summary = f"stable: eta_hat={result.eta_hat:.4g}, as_fraction={result.as_fraction:.3f}"
        return ExperimentOutcome(EXIT_PASS, report, summary)
    reasons = list(result.reasons)
    if not result.as_ok:
        reasons.append(f"as_fraction {result.as_fraction:.3f} below threshold")
    return ExperimentOutcome(EXIT_FAIL, report, "certification withheld: " + "; ".join(reasons))


def _path_holder(records, delta: float) -> np.ndarray:
    parts = [holder_parts(r.times, r.states, delta) for r in records if not r.diverged]
    return np.array([[p.seminorm, p.total] for p in parts])


def run_holder(manifest: RunManifest, report: Report) -> ExperimentOutcome:
    delta = manifest.config.estimators.holder_delta
    rows = []
    for config in _levels(manifest):
        sim = config.sim
        records = run_ensemble(sim, manifest.n_paths, workers=manifest.workers)
        n_diverged = sum(r.diverged for r in records)
        if _dominated(n_diverged, len(records)):
            return _divergence_outcome(report, records)
        values = _path_holder(records, delta)
        count = values.shape[0]
        rows.append(
            {
                "n_max": sim.n_max,
                "n_paths": count,
                "mean_seminorm": float(np.mean(values[:, 0])),
                "mean_holder_norm": float(np.mean(values[:, 1])),
                "se_holder_norm": float(np.std(values[:, 1], ddof=1) / np.sqrt(count)) if count > 1 else 0.0,
            }
        )
    spread = relative_spread([r["mean_holder_norm"] for r in rows])
    tolerance = manifest.config.estimators.holder_tolerance
    report.add("delta", delta)
    report.add("holder_norm.spread", spread)
    report.add("tolerance", tolerance)
    report.add("passed", spread <= tolerance)
    report.add_rows("levels", rows)
    if spread > tolerance:
        return ExperimentOutcome(EXIT_FAIL, report, f"Hölder norm spread {spread:.3f} exceeds {tolerance}")
    return ExperimentOutcome(EXIT_PASS, report, f"Hölder norm spread {spread:.3f} across {len(rows)} levels")


RUNNERS: Dict[str, Callable[[RunManifest, Report], ExperimentOutcome]] = {
    "simulate": run_simulate,
    "identities": run_identities,
    "monotonicity": run_monotonicity,
    "apriori": run_apriori,
    "stability": run_stability,
    "holder": run_holder,
}


def run(manifest: RunManifest) -> ExperimentOutcome:
    """
    Dispatch a manifest to its runner and write report.txt and metadata.json.

    Args:
        manifest: Validated run manifest

    Returns:
        ExperimentOutcome with the exit code
    """
    started = datetime.now(timezone.utc)
    report = Report(f"third-grade fluid {manifest.kind} run")
    _describe(report, manifest)
    try:
        outcome = RUNNERS[manifest.kind](manifest, report)
    except ConfigurationError as e:
        logger.error(f"Configuration error during {manifest.kind}: {e}")
        report.add("error", str(e))
        outcome = ExperimentOutcome(EXIT_CONFIG, report, str(e))
    except EnsembleError as e:
        logger.error(f"Ensemble error during {manifest.kind}: {e}")
        report.add("error", str(e))
        outcome = ExperimentOutcome(EXIT_DIVERGED, report, str(e))

    report.add("exit_code", outcome.exit_code)
    outcome.artifacts.append(report.write(manifest.out_dir / "report.txt"))
    outcome.artifacts.append(
        write_metadata(
            manifest.out_dir / "metadata.json",
            started,
            manifest,
            {"exit_code": outcome.exit_code, "summary": outcome.summary},
        )
    )
    return outcome
