import numpy as np
import pytest

from peakonlab.grid import Grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def smooth_grid():
    return Grid(20.0, 1024)


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
