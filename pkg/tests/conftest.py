import numpy as np
import pytest

from netspde import presets

ACCEPTANCE_LINES = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def edge3():
    """The 3x3 example: one edge, c = 1, M = -I, N = 2."""
    return presets.single_edge()


@pytest.fixture
def star():
    return presets.fhn_star()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
