"""
Shared fixtures: constitutive parameters, small bases and simulation configs.
"""
import math

import numpy as np
import pytest

from src.field.basis import PhysicalParams, build_basis
from src.integrator.config import InitialLaw, SimConfig
from src.integrator.stepper import PathRecord
from src.noise.diffusion import build_noise_model


@pytest.fixture
def params():
    return PhysicalParams(mu=1.0, alpha1=0.1, alpha2=0.0, beta=1.0)


@pytest.fixture
def rich_params():
    """Every constitutive term switched on, inside the monotonicity region."""
    return PhysicalParams(mu=1.0, alpha1=0.5, alpha2=-0.3, beta=1.0)


@pytest.fixture
def basis4(rich_params):
    return build_basis(4, rich_params)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_state(basis, rng, scale=1.0):
    """Coefficients with a |k|^{-2} spectrum."""
    return scale * rng.standard_normal(basis.n) / basis.k2


def make_config(**overrides) -> SimConfig:
    """Small valid configuration: n_max=2 on a 10x10 grid, no noise, lowest-mode start."""
    values = dict(
        n_max=2,
        M=10,
        dt=1e-2,
        T_end=0.2,
        params=PhysicalParams(mu=1.0, alpha1=0.1, alpha2=0.0, beta=1.0),
        noise=build_noise_model("additive", 0),
        initial=InitialLaw(kind="lowest_modes", energy=1.0),
        save_stride=1,
    )
    values.update(overrides)
    return SimConfig(**values)


def make_record(times, energy, path_index=0, diverged=False, n=4) -> PathRecord:
    """PathRecord with the given energies and zeros elsewhere."""
    times = np.asarray(times, dtype=float)
    energy = np.asarray(energy, dtype=float)
    zeros = np.zeros_like(times)
    return PathRecord(
        path_index=path_index,
        times=times,
        states=np.zeros((times.size, n)),
        energy_v=energy,
        a_l4=zeros,
        grad_l2=zeros,
        w14=zeros,
        ito_residual=zeros,
        sup_energy_v=np.maximum.accumulate(energy) if energy.size else energy,
        int_a_l4=zeros,
        int_grad_l2=zeros,
        int_w14=zeros,
        cutoff_min=np.ones_like(times),
        diverged=diverged,
        diverged_at=float(times[-1]) if diverged and times.size else None,
    )


SHEAR_INTEGRAL = 6.0 * math.pi ** 2
