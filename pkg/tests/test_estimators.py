"""
Tests for ensemble reduction, the energy budget, linear oracles, stability and the monotonicity survey.
"""
import math
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from src.cli.manifest import load_config
from src.core.errors import ConfigurationError, EnsembleError
from src.estimators.budget import (
    apriori_budget_check,
    linear_energy,
    linear_grad_budget,
    linear_second_moments,
    linear_second_moments_em,
    relative_spread,
)
from src.estimators.ensemble import aggregate, run_ensemble, split_halves
from src.estimators.stability import (
    AlphaConstants,
    DecayTarget,
    as_fraction,
    decay_target,
    ensemble_states,
    estimate_alpha_constants,
    fit_decay,
    stability_lambda,
    stability_margin,
    window_lambda,
)
from src.estimators.survey import boundary_params, default_params_grid, monotonicity_survey
from src.field.basis import PhysicalParams, build_basis
from src.integrator.config import InitialLaw
from src.integrator.stepper import simulate_path
from src.noise.diffusion import build_noise_model
from tests.conftest import make_config, make_record, random_state

TIMES = np.linspace(0.0, 10.0, 101)
EXPERIMENTS = Path(__file__).resolve().parents[1] / "config" / "experiments"


def decaying_records(rate=0.7, amplitudes=(1.9, 2.1)):
    return [make_record(TIMES, a * np.exp(-rate * TIMES), path_index=i) for i, a in enumerate(amplitudes)]


def nominal_target(**overrides) -> DecayTarget:
    values = dict(
        eta=0.5,
        eta1=math.inf,
        c_ell=0.0,
        e_u0_v2=2.0,
        margin=1.0,
        constants=AlphaConstants(0.0, 0.0, "spectral", 0),
        as_lambda=0.1,
    )
    values.update(overrides)
    return DecayTarget(**values)


class TestAggregate:
    """Pathwise-first ensemble reduction."""

    def test_identical_paths_have_zero_error(self, params):
        record = simulate_path(make_config(noise=build_noise_model("additive", 4, amplitude_scale=0.2)), 0)
        stats = aggregate([record] * 4, params)
        assert stats.n_paths == 4
        np.testing.assert_allclose(stats.se_energy_v, 0.0, atol=1e-12)
        np.testing.assert_allclose(stats.mean_energy_v, record.energy_v, rtol=1e-14)

    def test_deterministic_ensemble_equals_single_path(self, params):
        config = make_config()
        records = [simulate_path(config, i) for i in range(2)]
        stats = aggregate(records, params)
        np.testing.assert_array_equal(stats.mean_energy_v, records[0].energy_v)
        np.testing.assert_array_equal(stats.mean_sup_energy, records[0].sup_energy_v)

    def test_budgets_are_weighted_integrals(self):
        params = PhysicalParams(mu=0.5, alpha1=0.1, alpha2=0.0, beta=2.0)
        records = [simulate_path(make_config(params=params), i) for i in range(2)]
        stats = aggregate(records, params)
        np.testing.assert_allclose(stats.budget_a, 0.5 * 2.0 * records[0].int_a_l4)
        np.testing.assert_allclose(stats.budget_grad, 2.0 * 0.5 * records[0].int_grad_l2)

    def test_moment(self, params):
        stats = aggregate(decaying_records(), params, moment_p=4.0)
        expected = np.mean([r.energy_v ** 2 for r in decaying_records()], axis=0)
        np.testing.assert_allclose(stats.mean_moment, expected)
        assert "moment_4" in stats.csv_columns()

    def test_diverged_paths_excluded(self, params):
        records = decaying_records(amplitudes=(1.0, 2.0, 3.0))
        records.append(make_record(TIMES[:5], np.ones(5), path_index=3, diverged=True))
        stats = aggregate(records, params)
        assert stats.n_paths == 3
        assert stats.n_diverged == 1
        assert stats.diverged_fraction == pytest.approx(0.25)
        np.testing.assert_array_equal(stats.path_indices, [0, 1, 2])

    def test_all_diverged(self, params):
        records = [make_record(TIMES, np.ones_like(TIMES), path_index=i, diverged=True) for i in range(3)]
        with pytest.raises(EnsembleError, match="diverged"):
            aggregate(records, params)

    def test_single_completed_path(self, params):
        with pytest.raises(EnsembleError):
            aggregate(decaying_records(amplitudes=(1.0,)), params)

    def test_mismatched_grids(self, params):
        records = [make_record(TIMES, np.ones_like(TIMES)), make_record(TIMES[:-1], np.ones(100), path_index=1)]
        with pytest.raises(EnsembleError, match="time grid"):
            aggregate(records, params)

    def test_input_order_does_not_matter(self, params):
        records = decaying_records(amplitudes=(1.0, 2.5, 4.0, 0.5))
        forward = aggregate(records, params)
        backward = aggregate(records[::-1], params)
        np.testing.assert_array_equal(forward.mean_energy_v, backward.mean_energy_v)
        np.testing.assert_array_equal(forward.se_energy_v, backward.se_energy_v)
        np.testing.assert_array_equal(backward.path_indices, [0, 1, 2, 3])

    def test_split_halves(self):
        records = decaying_records(amplitudes=(1.0, 2.0, 3.0, 4.0, 5.0))
        even, odd = split_halves(records)
        assert [r.path_index for r in even] == [0, 2, 4]
        assert [r.path_index for r in odd] == [1, 3]


class TestEnsembleRunner:
    """Process-pool ensembles."""

    def test_in_process_order(self):
        config = make_config(noise=build_noise_model("additive", 4, amplitude_scale=0.2))
        records = run_ensemble(config, 3, workers=1, first_index=5)
        assert [r.path_index for r in records] == [5, 6, 7]
        np.testing.assert_array_equal(records[1].states, simulate_path(config, 6).states)

    @pytest.mark.slow
    def test_worker_count_does_not_change_results(self):
        config = make_config(noise=build_noise_model("linear_multiplicative", 4, amplitude_scale=0.3, seed=2))
        serial = run_ensemble(config, 6, workers=1)
        pooled = run_ensemble(config, 6, workers=3)
        for a, b in zip(serial, pooled):
            assert a.path_index == b.path_index
            np.testing.assert_array_equal(a.states, b.states)

    def test_empty_ensemble(self):
        with pytest.raises(EnsembleError):
            run_ensemble(make_config(), 0)

    @pytest.mark.slow
    def test_halves_agree(self, params):
        config = make_config(
            noise=build_noise_model("additive", 8, amplitude_scale=0.5, seed=3),
            T_end=0.5,
            save_stride=10,
        )
        records = run_ensemble(config, 128)
        even, odd = (aggregate(half, params) for half in split_halves(records))
        pooled = math.sqrt(even.se_energy_v[-1] ** 2 + odd.se_energy_v[-1] ** 2)
        assert abs(even.mean_energy_v[-1] - odd.mean_energy_v[-1]) < 3.0 * pooled

    @pytest.mark.slow
    def test_mean_ito_residual_halves_with_dt(self):
        """With noise on, the ensemble-mean Itô residual is first order in dt."""
        config, errors = load_config(EXPERIMENTS / "simulate.ini", env={})
        assert errors == []
        residuals = []
        for dt in (4e-3, 2e-3, 1e-3):
            sim = replace(config.sim, dt=dt)
            stats = aggregate(run_ensemble(sim, 64), sim.params)
            residuals.append(stats.mean_ito_residual[-1])
        assert residuals[0] > 0.0
        assert residuals[0] / residuals[1] == pytest.approx(2.0, rel=0.2)
        assert residuals[1] / residuals[2] == pytest.approx(2.0, rel=0.2)


class TestBudget:
    """A priori energy budget and the linear-sector oracles."""

    def test_zero_everything(self, params):
        config = make_config(initial=InitialLaw(kind="zero"))
        stats = aggregate([simulate_path(config, i) for i in range(2)], params)
        check = apriori_budget_check(stats, 0.0)
        assert not np.any(check.lhs)
        assert check.final_ratio == 0.0

    def test_ratio_normalization(self, params):
        stats = aggregate(decaying_records(), params)
        check = apriori_budget_check(stats, 3.0)
        np.testing.assert_allclose(check.ratio, check.lhs / 4.0)
        with pytest.raises(ConfigurationError):
            apriori_budget_check(stats, -1.0)

    def test_relative_spread(self):
        assert relative_spread([1.0, 0.9, 0.95]) == pytest.approx(0.1)
        assert relative_spread([0.0, 0.0]) == 0.0

    def test_noise_free_oracle_matches_path(self, params):
        config = make_config(nonlinear=False, T_end=0.5, dt=1e-2)
        record = simulate_path(config, 0)
        moments = linear_second_moments_em(config, config.n_steps)
        np.testing.assert_allclose(record.energy_v, moments @ config.basis.lambdas, rtol=1e-12)

    def test_exact_and_discrete_moments_agree(self):
        config = make_config(
            noise=build_noise_model("additive", 8, amplitude_scale=0.5),
            nonlinear=False,
            dt=1e-4,
            T_end=1.0,
        )
        times = np.linspace(0.0, 1.0, config.n_steps + 1)
        exact = linear_second_moments(config, times)
        discrete = linear_second_moments_em(config, config.n_steps)
        np.testing.assert_allclose(discrete, exact, rtol=1e-3, atol=1e-12)

    def test_multiplicative_moment_growth(self):
        config = make_config(
            noise=build_noise_model("linear_multiplicative", 4, amplitude_scale=0.3),
            nonlinear=False,
        )
        times = np.array([0.0, 1.0])
        moments = linear_second_moments(config, times)
        a = config.params.mu * config.basis.k2 / config.basis.lambdas
        q = config.noise.kappa / config.basis.lambdas ** 2
        np.testing.assert_allclose(moments[1], moments[0] * np.exp(-2.0 * a + q))

    def test_grad_budget_without_noise(self):
        config = make_config(nonlinear=False, dt=1e-3, T_end=1.0, save_stride=1000)
        record = simulate_path(config, 0)
        oracle = linear_grad_budget(config, 1.0)
        assert 2.0 * config.params.mu * record.int_grad_l2[-1] == pytest.approx(oracle, rel=1e-2)

    def test_oracles_reject_nonlinear_configs(self):
        with pytest.raises(ConfigurationError):
            linear_energy(make_config(), np.array([0.0]))

    @pytest.mark.slow
    def test_ornstein_uhlenbeck_energy(self, params):
        config = make_config(
            noise=build_noise_model("additive", 8, amplitude_scale=0.5, seed=5),
            nonlinear=False,
            T_end=1.0,
            save_stride=10,
        )
        stats = aggregate(run_ensemble(config, 512), params)
        oracle = linear_second_moments_em(config, config.n_steps)[::10] @ config.basis.lambdas
        error = np.abs(stats.mean_energy_v - oracle)
        assert np.all(error <= 4.0 * stats.se_energy_v + 1e-3 * oracle)


class TestStabilityConstants:
    """Λ, Λ', the margin and the α constants."""

    def test_lambda_without_noise(self):
        assert stability_lambda(1.5, 0.0, math.inf, 0.3) == 1.5

    def test_lambda_formula(self):
        assert stability_lambda(1.0, 0.5, 1.0, 0.5) == pytest.approx(2.0 * math.exp(0.5))
        with pytest.raises(ConfigurationError):
            stability_lambda(1.0, 0.5, 1.0, 1.0)

    def test_window_lambda(self):
        assert window_lambda(1.0, 0.5, 0.5, 1.0) == pytest.approx(2.0 * (1.0 + 9.5 + 9.5 / 1.5))
        assert window_lambda(3.0, 0.0, 0.5, math.inf) == 6.0

    def test_margin(self):
        params = PhysicalParams(mu=1.0, alpha1=0.5, alpha2=0.0, beta=2.0)
        constants = AlphaConstants(0.5, 0.0, "spectral", 0)
        assert stability_margin(params, 0.5, constants) == pytest.approx(1.25)

    def test_spectral_constants(self, rich_params, basis4):
        constants = estimate_alpha_constants(np.zeros((1, basis4.n)), rich_params, basis4, 16, mode="spectral")
        factor = np.max(np.sqrt(basis4.k2 / basis4.lambdas))
        assert constants.c_alpha1 == pytest.approx(0.5 * factor)
        assert constants.c_alpha2 == pytest.approx(0.3 * factor)

    def test_empirical_constants_bound_the_pairings(self, rich_params, basis4, rng):
        states = np.array([random_state(basis4, rng, scale=s) for s in (0.1, 0.5, 1.0, 2.0)])
        constants = estimate_alpha_constants(states, rich_params, basis4, 16)
        assert constants.mode == "empirical"
        assert constants.n_states == 4
        # both pairings vanish identically in two dimensions
        assert constants.c_alpha1 < 1e-6
        assert constants.c_alpha2 < 1e-6
        margin = stability_margin(rich_params, 0.0, constants)
        assert margin == pytest.approx(2 * rich_params.mu, abs=1e-5)

    def test_unknown_mode(self, rich_params, basis4):
        with pytest.raises(ConfigurationError):
            estimate_alpha_constants(np.zeros((1, basis4.n)), rich_params, basis4, 16, mode="guess")

    def test_decay_target_needs_decaying_noise(self):
        config = make_config(noise=build_noise_model("additive", 4, amplitude_scale=0.2))
        with pytest.raises(ConfigurationError):
            decay_target(config, AlphaConstants(0.0, 0.0, "spectral", 0))

    def test_decay_target_rate(self):
        config = make_config(noise=build_noise_model("decaying_multiplicative", 4, amplitude_scale=0.2, eta1=0.8))
        target = decay_target(config, AlphaConstants(0.0, 0.0, "spectral", 0), eta_fraction=0.5)
        assert target.margin == pytest.approx(2.0)
        assert target.eta == pytest.approx(0.4)
        assert target.eta1 == 0.8
        assert target.as_lambda == pytest.approx(0.1)
        assert target.lambda_bound > target.e_u0_v2

    def test_noise_free_target(self):
        target = decay_target(make_config(), AlphaConstants(0.0, 0.0, "spectral", 0))
        assert target.eta1 == math.inf
        assert target.eta == pytest.approx(1.0)
        assert target.lambda_bound == pytest.approx(1.0)

    def test_ensemble_states(self):
        records = decaying_records()
        states = ensemble_states(records, max_states=50)
        assert states.shape == (50, 4)
        with pytest.raises(ConfigurationError):
            ensemble_states([make_record(TIMES, np.ones_like(TIMES), diverged=True)])


class TestFitDecay:
    """Log-linear fit and the stability bounds."""

    def test_rate_only(self, params):
        report = fit_decay(aggregate(decaying_records(rate=0.7), params), (1.0, 10.0))
        assert report.eta_hat == pytest.approx(0.7, rel=1e-10)
        assert not report.truncated
        assert report.window == (1.0, 10.0)
        assert not report.certified

    def test_certified(self, params):
        stats = aggregate(decaying_records(rate=0.7), params)
        report = fit_decay(stats, (1.0, 10.0), nominal_target())
        assert report.bound_violations == 0
        assert report.window_bound_violations == 0
        assert report.as_fraction == 1.0
        assert report.certified
        assert report.as_ok
        assert report.as_dict()["reasons"] == "none"

    def test_bound_violation(self, params):
        stats = aggregate(decaying_records(rate=0.3), params)
        report = fit_decay(stats, (1.0, 10.0), nominal_target(eta=0.6))
        assert report.bound_violations > 0
        assert not report.certified

    def test_negative_margin_withholds(self, params):
        stats = aggregate(decaying_records(rate=0.7), params)
        report = fit_decay(stats, (1.0, 10.0), nominal_target(margin=-0.2))
        assert not report.certified
        assert any("margin" in r for r in report.reasons)

    def test_divergence_withholds(self, params):
        records = decaying_records(amplitudes=(1.9, 2.0, 2.1))
        records.append(make_record(TIMES[:3], np.ones(3), path_index=3, diverged=True))
        report = fit_decay(aggregate(records, params), (1.0, 10.0), nominal_target())
        assert any("diverged" in r for r in report.reasons)
        assert report.as_fraction == pytest.approx(0.75)

    def test_truncated_window(self, params):
        energy = np.exp(-0.5 * TIMES)
        energy[TIMES > 6.0] = 0.0
        records = [make_record(TIMES, energy, path_index=i) for i in range(2)]
        report = fit_decay(aggregate(records, params), (1.0, 10.0))
        assert report.truncated
        assert report.window[1] <= 6.0
        assert report.eta_hat == pytest.approx(0.5, rel=1e-10)

    def test_window_too_short(self, params):
        with pytest.raises(ConfigurationError):
            fit_decay(aggregate(decaying_records(), params), (20.0, 30.0))

    def test_as_fraction(self, params):
        stats = aggregate(decaying_records(rate=0.7), params)
        assert as_fraction(stats, 0.1) == 1.0
        assert as_fraction(stats, 1.0) == 0.0

    def test_linear_decay_rate(self, params):
        config = make_config(
            params=PhysicalParams(mu=0.2, alpha1=0.1, alpha2=0.0, beta=1.0),
            nonlinear=False,
            dt=1e-3,
            T_end=5.0,
            save_stride=50,
        )
        records = [simulate_path(config, i) for i in range(2)]
        report = fit_decay(aggregate(records, config.params), (1.0, 5.0))
        basis = config.basis
        expected = 2.0 * 0.2 * np.min(basis.k2 / basis.lambdas)
        assert report.eta_hat == pytest.approx(expected, rel=0.02)


class TestSurvey:
    """Monotonicity survey over constitutive parameter sets."""

    def test_boundary_params(self):
        params = boundary_params(mu=1.0, beta=1.0, alpha1=1.0)
        lhs = 3.0 * params.alpha1 ** 2 + 4.0 * (params.alpha1 + params.alpha2) ** 2
        assert lhs == pytest.approx(24.0)
        assert params.monotone_ok
        with pytest.raises(ValueError):
            boundary_params(mu=0.1, beta=0.1, alpha1=2.0)

    def test_default_grid(self):
        grid = default_params_grid()
        assert sum(p.monotone_ok for p in grid) == 5
        assert not grid[-1].monotone_ok

    def test_survey(self, rng):
        basis = build_basis(3, PhysicalParams(mu=1.0, alpha1=0.5, alpha2=0.0, beta=1.0))
        rows = monotonicity_survey(default_params_grid(), 30, basis, 14, rng)
        assert len(rows) == 6
        assert rows[0].min_gap >= 0.0
        for row in rows[:-1]:
            assert row.passed
        assert rows[-1].passed is None
        assert rows[-1].as_dict()["passed"] == "n/a"
