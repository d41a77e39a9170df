import warnings

import numpy as np
import pytest

from effvel.grid import Grid
from effvel.state import AugmentedState, PressureLaw


@pytest.fixture
def periodic_2pi():
    return Grid.line(256, 0.0, 2.0 * np.pi)


@pytest.fixture
def shock_grid():
    return Grid.line(1024, -10.0, 10.0)


def shock_state(grid, mu=0.5, v_amp=0.0):
    x = grid.x
    rho = np.where(np.abs(x) < 1.0, 2.0, 1.0)
    v = v_amp * np.where(np.abs(x) < 1.0, 1.0, 0.0)
    return AugmentedState.from_rho_v(0.0, rho, v, mu, grid)


GAMMA2 = PressureLaw(1.0, 2.0)


@pytest.fixture(autouse=True)
def _quiet_under_resolution_warning():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="sample times grow")
        yield
