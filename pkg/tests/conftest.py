"""Shared fixtures and random-state helpers for the test suite."""

import numpy as np
import pytest

from stflow.fluxes import StateGradient
from stflow.gas import GasProperties, PrimitiveState, air


def random_state(rng, nsd, mach_scale=0.5):
    """A random physically admissible primitive state."""
    T = rng.uniform(200.0, 400.0)
    p = rng.uniform(0.5e5, 2.0e5)
    c = np.sqrt(1.4 * 287.0 * T)
    u = rng.uniform(-mach_scale * c, mach_scale * c, size=nsd)
    return PrimitiveState(p=p, u=u, T=T)


def random_gradient(rng, nsd, scale=10.0):
    """Random spatial and temporal derivative data for an m-vector state."""
    m = nsd + 2
    typ = np.array([1.0e5] + [100.0] * nsd + [300.0])
    dY = rng.uniform(-1.0, 1.0, size=(m, nsd)) * scale * typ[:, None]
    dYdt = rng.uniform(-1.0, 1.0, size=m) * scale * typ
    return StateGradient(dY=dY, dYdt=dYdt)


@pytest.fixture
def rng():
    return np.random.default_rng(170856)


@pytest.fixture
def gas_air():
    return air()


@pytest.fixture
def gas_inviscid():
    return air(viscosity_model="constant", viscosity_params=(0.0,))


@pytest.fixture
def gas_constant_mu():
    return GasProperties(viscosity_model="constant", viscosity_params=(1.8e-5,))
