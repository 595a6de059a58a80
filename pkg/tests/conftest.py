import math

import numpy as np
import pytest

from locpilot.geometry import CellConfig, UserDrop
from locpilot.training import TrainingConfig


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def default_drop(rng):
    """20 users, r ~ U[100, 1000] m, theta ~ U[0, 2pi), K = 3."""
    return UserDrop.from_arrays(rng.uniform(100, 1000, 20), rng.uniform(0, 2 * math.pi, 20), 3.0)


@pytest.fixture
def cell20():
    return CellConfig(20)


@pytest.fixture
def train10():
    return TrainingConfig(p_u=10.0, tau=10)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
