import numpy as np
import pytest

from bateman.model import ModelParams, derive_params


@pytest.fixture(scope="session")
def unit():
    """Natural-units reference point: m = Ω₀ = s = ħ = 1, so Γ = 1/2."""
    return ModelParams(m=1.0, omega0=1.0, s=1.0, hbar=1.0)


@pytest.fixture(scope="session")
def unit_derived(unit):
    return derive_params(unit)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20250808)
