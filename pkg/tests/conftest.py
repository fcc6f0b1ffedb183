import numpy as np
import pytest

from scatmono.dynamics import PerturbedSystem
from scatmono.integrator import IntegratorConfig
from scatmono.normal_form import normalize
from scatmono.polynomial import FlatPolynomial

TIGHT = IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12)


@pytest.fixture(scope="session")
def cfg():
    return TIGHT


@pytest.fixture(scope="session")
def quartic():
    """``R = 0.05 z1^2 z2^2`` normalized on the polydisk of radius 0.3."""
    R = FlatPolynomial({(2, 2): 0.05})
    return PerturbedSystem(R), normalize(R, 0.3, TIGHT)


@pytest.fixture(scope="session")
def standard():
    return PerturbedSystem(), normalize(FlatPolynomial.zero(), 1.0, TIGHT)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
