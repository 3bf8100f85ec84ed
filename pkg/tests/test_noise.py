"""
Tests for Wiener increment streams and the diffusion families.
"""
import math

import numpy as np
import pytest

from src.core.errors import ConfigurationError
from src.field.basis import COS, PhysicalParams, build_basis
from src.noise.diffusion import (
    build_noise_model,
    diffusion,
    growth_ratio,
    ito_correction,
    stokes_lift_diffusion,
)
from src.noise.wiener import INCREMENTS, INITIAL_STATE, path_stream, sample_increment
from tests.conftest import random_state


class TestWienerIncrements:
    """Counter-based N(0, dt) streams."""

    def test_moments(self):
        dt, count = 1e-3, 100_000
        draws = sample_increment(dt, count, path_stream(7, 0)).dbeta
        assert abs(np.mean(draws)) < 4.0 * math.sqrt(dt / count)
        assert np.var(draws) == pytest.approx(dt, rel=0.02)

    def test_same_seed_same_sequence(self):
        first = sample_increment(0.01, 5, path_stream(11, 3)).dbeta
        second = sample_increment(0.01, 5, path_stream(11, 3)).dbeta
        np.testing.assert_array_equal(first, second)

    def test_streams_independent_of_creation_order(self):
        a_first = path_stream(5, 2).standard_normal(4)
        path_stream(5, 1).standard_normal(100)
        a_again = path_stream(5, 2).standard_normal(4)
        np.testing.assert_array_equal(a_first, a_again)

    def test_paths_and_purposes_differ(self):
        base = path_stream(5, 0, INCREMENTS).standard_normal(4)
        assert not np.array_equal(base, path_stream(5, 1, INCREMENTS).standard_normal(4))
        assert not np.array_equal(base, path_stream(5, 0, INITIAL_STATE).standard_normal(4))

    def test_empty_increment(self):
        increment = sample_increment(0.1, 0, path_stream(0, 0))
        assert increment.K == 0
        assert increment.dbeta.shape == (0,)

    def test_invalid_step(self):
        with pytest.raises(ConfigurationError):
            sample_increment(0.0, 3, path_stream(0, 0))
        with pytest.raises(ConfigurationError):
            sample_increment(-1e-3, 3, path_stream(0, 0))


class TestNoiseModel:
    """Amplitudes and the Lipschitz/growth constants."""

    def test_constants(self):
        model = build_noise_model("linear_multiplicative", 4, amplitude_scale=0.5)
        mass = 0.25 * sum(k ** -2.0 for k in range(1, 5))
        assert model.kappa == pytest.approx(mass)
        assert model.ell == pytest.approx(mass)
        np.testing.assert_allclose(model.q_spectrum, [1.0, 0.25, 1.0 / 9.0, 1.0 / 16.0])

    def test_additive_is_not_lipschitz_dependent(self):
        assert build_noise_model("additive", 4, amplitude_scale=0.5).kappa == 0.0

    def test_tail_mass(self):
        model = build_noise_model("additive", 1, amplitude_scale=1.0)
        assert model.tail_mass() == pytest.approx(math.pi ** 2 / 6.0 - 1.0)
        assert build_noise_model("additive", 3, amplitude_scale=1.0, amplitude_decay=0.5).tail_mass() == math.inf

    def test_decaying_needs_rate(self):
        with pytest.raises(ConfigurationError, match="DIFSTAT"):
            build_noise_model("decaying_multiplicative", 4, amplitude_scale=0.1, eta1=0.0)

    def test_unknown_kind(self):
        with pytest.raises(ConfigurationError):
            build_noise_model("fractional", 4)


class TestDiffusion:
    """σ^k(t, u) for the three families."""

    @pytest.fixture
    def basis(self):
        return build_basis(3, PhysicalParams(mu=1.0, alpha1=0.2, alpha2=0.0, beta=1.0))

    def test_multiplicative_zero_state(self, basis):
        model = build_noise_model("linear_multiplicative", 6, amplitude_scale=0.3)
        assert not np.any(diffusion(0.0, np.zeros(basis.n), model, basis))

    def test_additive_profiles(self, basis):
        model = build_noise_model("additive", 3, amplitude_scale=2.0)
        sigma = diffusion(0.5, np.zeros(basis.n), model, basis)
        assert sigma.shape == (3, basis.n)
        np.testing.assert_allclose(sigma[np.arange(3), np.arange(3)], model.amplitudes)
        assert np.count_nonzero(sigma) == 3

    def test_growth_bound(self, basis, rng):
        for kind in ("additive", "linear_multiplicative", "decaying_multiplicative"):
            model = build_noise_model(kind, 8, amplitude_scale=0.4, eta1=0.5)
            for _ in range(500):
                t = rng.uniform(0.0, 5.0)
                c = random_state(basis, rng, scale=10.0 ** rng.uniform(-2, 1))
                assert growth_ratio(t, c, model, basis) <= model.ell * (1.0 + 1e-12)

    def test_decay_envelope(self, basis, rng):
        model = build_noise_model("decaying_multiplicative", 8, amplitude_scale=0.4, eta1=0.5)
        for t in np.linspace(0.0, 10.0, 21):
            c = random_state(basis, rng)
            bound = model.c_ell * math.exp(-model.eta1 * t)
            assert growth_ratio(t, c, model, basis) <= bound * (1.0 + 1e-12)

    def test_lipschitz_constant(self, basis, rng):
        model = build_noise_model("linear_multiplicative", 8, amplitude_scale=0.4)
        u, y = random_state(basis, rng), random_state(basis, rng)
        difference = diffusion(0.0, u, model, basis) - diffusion(0.0, y, model, basis)
        ratio = np.sum(difference ** 2) / np.sum((u - y) ** 2)
        assert ratio == pytest.approx(model.kappa, rel=1e-12)

    def test_ito_isometry(self, basis, rng):
        model = build_noise_model("linear_multiplicative", 6, amplitude_scale=0.5)
        c = random_state(basis, rng)
        sigma = diffusion(0.0, c, model, basis)
        dt, draws = 1e-2, 100_000
        dbeta = sample_increment(dt, draws * model.K, path_stream(3, 0)).dbeta.reshape(draws, model.K)
        kicks = dbeta @ sigma
        j = basis.index_of((1, 0), COS)
        assert np.mean(kicks[:, j] ** 2) == pytest.approx(dt * np.sum(sigma[:, j] ** 2), rel=0.03)


class TestStokesLift:
    """σ̃^k = σ^k/λ and the Itô correction Σ‖σ̃^k‖_V²."""

    def test_identity_without_alpha1(self, rng):
        basis = build_basis(2, PhysicalParams(mu=1.0, alpha1=0.0, alpha2=0.0, beta=1.0))
        sigma = rng.standard_normal((4, basis.n))
        np.testing.assert_array_equal(stokes_lift_diffusion(sigma, basis), sigma)

    def test_single_mode(self):
        basis = build_basis(1, PhysicalParams(mu=1.0, alpha1=1.0, alpha2=0.0, beta=1.0))
        sigma = np.zeros((1, basis.n))
        sigma[0, basis.index_of((1, 0), COS)] = 1.0
        assert ito_correction(sigma, basis) == pytest.approx(0.5)

    def test_correction_below_unlifted_mass(self, basis4, rng):
        sigma = rng.standard_normal((5, basis4.n))
        lifted = stokes_lift_diffusion(sigma, basis4)
        assert ito_correction(sigma, basis4) == pytest.approx(np.sum(basis4.lambdas * lifted ** 2))
        assert ito_correction(sigma, basis4) <= np.sum(sigma ** 2)
