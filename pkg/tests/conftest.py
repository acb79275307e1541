import numpy as np
import pytest

from phaserec import ComplexSignal, TimeGrid, TwoStateParams, two_state_amplitude


def period_grid(n, period, symmetric=True):
    """One exactly sampled period; symmetric grids are offset half a cell
    so model zeros do not land on samples."""
    dt = period / n
    t0 = -0.5 * period + 0.5 * dt if symmetric else 0.0
    return TimeGrid(t0, dt, n, period)


@pytest.fixture(scope="session")
def two_state_8():
    return TwoStateParams.from_ratio(1.0, 8.0)


@pytest.fixture(scope="session")
def two_state_signal(two_state_8):
    grid = period_grid(4096, two_state_8.period)
    return ComplexSignal(grid, two_state_amplitude(two_state_8, grid.times()),
                         "two_state_ground")
