import math

import pytest

from omtx import OptomechParams, instability_threshold

TWO_PI = 2.0 * math.pi


@pytest.fixture(scope="session")
def params():
    """Reference operating point: rates (0.9, 10, 2*pi*0.215, 2*pi*0.14) rad/us,
    pump detuning -omega_m."""
    return OptomechParams(
        g0=0.9,
        omega_m=10.0,
        kappa=TWO_PI * 0.215,
        gamma_m=TWO_PI * 0.14,
        delta_p=-10.0,
    )


@pytest.fixture(scope="session")
def threshold(params):
    """Pump amplitude of the first parametric-instability onset."""
    return instability_threshold(params, (10.0, 30.0))
