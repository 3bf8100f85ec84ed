"""
Tests for the Galerkin drift, the trilinear form and the monotone operator 𝒬.
"""
import math

import numpy as np
import pytest

from src.core.errors import ConfigurationError, ResolutionError
from src.field.basis import SIN, PhysicalParams, build_basis
from src.field.grid import to_grid
from src.field.norms import a_l4_fourth, grad_l2_sq
from src.field.state import SpectralState
from src.operators.drift import assemble_drift, q_operator, trilinear_b
from src.operators.forcing import ForceModel, mode_profile, zero_force
from src.operators.identities import energy_pairing_identities, gap_scale, monotonicity_gap
from tests.conftest import SHEAR_INTEGRAL, random_state


def shear_coeffs(basis) -> np.ndarray:
    c = np.zeros(basis.n)
    c[basis.index_of((0, 1), SIN)] = math.sqrt(2.0) * math.pi
    return c


class TestTrilinear:
    """b(u, y, z) = ∫ (u·∇y)·z."""

    def test_antisymmetry(self, basis4, rng):
        for _ in range(10):
            u, y, z = (random_state(basis4, rng) for _ in range(3))
            forward = trilinear_b(u, y, z, basis4, 16)
            swapped = trilinear_b(u, z, y, basis4, 16)
            assert abs(forward + swapped) <= 1e-10 * (1.0 + abs(forward))

    def test_self_pairing_vanishes(self, basis4, rng):
        u, y = random_state(basis4, rng), random_state(basis4, rng)
        assert abs(trilinear_b(u, y, y, basis4, 16)) < 1e-10

    def test_shear_flow(self, rich_params):
        basis = build_basis(2, rich_params)
        c = shear_coeffs(basis)
        assert abs(trilinear_b(c, c, c, basis, 8)) < 1e-12

    def test_dimension_mismatch(self, basis4):
        with pytest.raises(ConfigurationError):
            trilinear_b(np.zeros(basis4.n), np.zeros(3), np.zeros(basis4.n), basis4, 16)


class TestAssembleDrift:
    """Pseudo-spectral assembly of the seven drift fields."""

    def test_zero_state(self, basis4, rich_params):
        drift = assemble_drift(SpectralState.zeros(basis4), 0.0, rich_params, zero_force(), basis4, 16)
        for name, values in drift.as_dict().items():
            assert not np.any(values), name

    def test_shear_mode(self, rich_params):
        basis = build_basis(2, rich_params)
        c = shear_coeffs(basis)
        drift = assemble_drift(c, 0.0, rich_params, zero_force(), basis, 8)
        np.testing.assert_allclose(drift.convection, 0.0, atol=1e-12)
        np.testing.assert_allclose(drift.laplacian, -rich_params.mu * c)

    def test_resolution_error(self, basis4, rich_params):
        with pytest.raises(ResolutionError):
            assemble_drift(np.zeros(basis4.n), 0.0, rich_params, zero_force(), basis4, 12)

    def test_energy_pairing(self, basis4, rich_params, rng):
        """Pairing with u leaves only the dissipative terms."""
        c = random_state(basis4, rng)
        drift = assemble_drift(c, 0.0, rich_params, zero_force(), basis4, 16)
        grid = to_grid(c, basis4, 16)
        expected = (
            -rich_params.mu * grad_l2_sq(c, basis4)
            - 0.5 * rich_params.beta * a_l4_fourth(grid)
            + float(np.dot(drift.alpha1_shear, c))
        )
        paired = float(np.dot(drift.total() - drift.force, c))
        assert paired == pytest.approx(expected, rel=1e-8, abs=1e-10)

    def test_dealiased_resolution(self, basis4, rich_params, rng):
        c = random_state(basis4, rng)
        coarse = assemble_drift(c, 0.0, rich_params, zero_force(), basis4, 18).total()
        fine = assemble_drift(c, 0.0, rich_params, zero_force(), basis4, 36).total()
        assert np.max(np.abs(coarse - fine)) < 1e-9 * np.max(np.abs(fine))

    def test_force_enters_unchanged(self, basis4, rich_params):
        profile = mode_profile(basis4, 0.3, [(1, 0), (0, 2)])
        force = ForceModel(kind="constant_field", payload=profile)
        drift = assemble_drift(np.zeros(basis4.n), 1.0, rich_params, force, basis4, 16)
        np.testing.assert_array_equal(drift.force, profile)
        np.testing.assert_array_equal(drift.total(), profile)

    def test_decaying_force_envelope(self, basis4):
        profile = mode_profile(basis4, 1.0, [(1, 0)])
        force = ForceModel(kind="decaying", eta1=2.0, c_phi=1.0, payload=profile)
        np.testing.assert_allclose(force.coefficients(1.0, basis4), math.exp(-1.0) * profile)
        assert force.decay_bound_ok(1.0)
        assert not force.decay_bound_ok(0.5)

    def test_cutoff_gates_nonlinear_part(self, basis4, rich_params, rng):
        c = random_state(basis4, rng)
        drift = assemble_drift(c, 0.0, rich_params, zero_force(), basis4, 16)
        np.testing.assert_array_equal(drift.total(0.0), drift.laplacian + drift.force)

    def test_potential_gradient(self, basis4, rich_params, rng):
        """Stokes and β fields are minus the gradient of μ/2‖∇u‖² + β/8‖A‖₄⁴."""
        u = random_state(basis4, rng)
        w = random_state(basis4, rng)
        M, h = 18, 1e-5

        def potential(c):
            return 0.5 * rich_params.mu * grad_l2_sq(c, basis4) + rich_params.beta / 8.0 * a_l4_fourth(
                to_grid(c, basis4, M)
            )

        numeric = (potential(u + h * w) - potential(u - h * w)) / (2.0 * h)
        drift = assemble_drift(u, 0.0, rich_params, zero_force(), basis4, M)
        analytic = -float(np.dot(drift.laplacian + drift.beta_term, w))
        assert numeric == pytest.approx(analytic, rel=1e-6)


class TestPairingIdentities:
    """Cancellations behind the a priori energy estimate."""

    def test_zero_state(self, basis4, rich_params):
        residuals = energy_pairing_identities(np.zeros(basis4.n), rich_params, basis4, 16)
        assert residuals == (0.0, 0.0, 0.0, 0.0)

    def test_shear_mode(self, rich_params):
        basis = build_basis(2, rich_params)
        residuals = energy_pairing_identities(shear_coeffs(basis), rich_params, basis, 8)
        assert residuals.max_abs() < 1e-10 * SHEAR_INTEGRAL

    def test_random_states(self, rich_params, rng):
        basis = build_basis(8, rich_params)
        for _ in range(5):
            c = random_state(basis, rng, scale=2.0)
            scale = 1.0 + float(np.dot(basis.lambdas, c * c)) ** 1.5
            residuals = energy_pairing_identities(c, rich_params, basis, 32)
            assert residuals.max_abs() < 1e-8 * scale


class TestQOperator:
    """𝒬(u) and its monotonicity gap."""

    def test_stokes_case(self, rng):
        params = PhysicalParams(mu=0.7, alpha1=0.0, alpha2=0.0, beta=0.0)
        basis = build_basis(4, params)
        c = random_state(basis, rng)
        np.testing.assert_allclose(q_operator(c, params, basis, 16), 0.7 * basis.k2 * c, rtol=1e-12, atol=1e-13)

    def test_matches_drift_fields(self, basis4, rich_params, rng):
        c = random_state(basis4, rng)
        drift = assemble_drift(c, 0.0, rich_params, zero_force(), basis4, 16)
        expected = -(drift.laplacian + drift.alpha1_shear + drift.alpha2_term + drift.beta_term)
        np.testing.assert_allclose(q_operator(c, rich_params, basis4, 16), expected, rtol=1e-10, atol=1e-12)

    def test_cubic_homogeneity_broken(self, basis4, rich_params, rng):
        c = random_state(basis4, rng)
        single = q_operator(c, rich_params, basis4, 16)
        double = q_operator(2.0 * c, rich_params, basis4, 16)
        assert not np.allclose(double, 2.0 * single)

    def test_gap_of_identical_states(self, basis4, rich_params, rng):
        c = random_state(basis4, rng)
        assert monotonicity_gap(c, c, rich_params, basis4, 16) == 0.0

    def test_gap_in_linear_regime(self, basis4, rng):
        params = PhysicalParams(mu=1.3, alpha1=0.0, alpha2=0.0, beta=1.0)
        u = random_state(basis4, rng, scale=1e-3)
        y = random_state(basis4, rng, scale=1e-3)
        gap = monotonicity_gap(u, y, params, basis4, 16)
        assert gap == pytest.approx(1.3 * grad_l2_sq(u - y, basis4), rel=1e-4)

    def test_gap_nonnegative_inside_region(self, basis4, rich_params, rng):
        assert rich_params.monotone_ok
        for _ in range(50):
            u = random_state(basis4, rng, scale=10.0 ** rng.uniform(-1, 0.5))
            y = random_state(basis4, rng, scale=10.0 ** rng.uniform(-1, 0.5))
            gap = monotonicity_gap(u, y, rich_params, basis4, 16)
            assert gap >= -1e-9 * gap_scale(u, y, basis4, 16)

