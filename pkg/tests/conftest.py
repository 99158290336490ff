import numpy as np
import pytest

from mssrel.pareto import RecordSample

DATA_R = (0.40, 82.85, 89.29, 215.10)
DATA_S = (0.47, 0.73, 1.40, 2.38)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def fluid_records():
    return RecordSample(DATA_R), RecordSample(DATA_S)


def fd_central(f, x, h=1e-5):
    return (f(x + h) - f(x - h)) / (2 * h)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
