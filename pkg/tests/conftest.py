import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mg1learn import phtype

settings.register_profile(
    "mg1",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("mg1")


@pytest.fixture
def exp1():
    """Exponential(1) as a one-phase PH."""
    return phtype.validate([1.0], [[-1.0]])


@pytest.fixture
def erlang2():
    """Erlang-2 with rate 2 per stage (mean 1, Cv^2 = 0.5)."""
    return phtype.validate([1.0, 0.0], [[-2.0, 2.0], [0.0, -2.0]])


@pytest.fixture
def hyperexp():
    """Two-branch hyperexponential (mean 0.7, Cv^2 > 1)."""
    return phtype.validate([0.4, 0.6], [[-2.0, 0.0], [0.0, -0.5]])


def geometric_law(rho: float, l: int = 70) -> np.ndarray:
    """M/M/1 stationary law P(N=n) = (1-rho) rho^n, truncated at l."""
    return (1.0 - rho) * rho ** np.arange(l)
