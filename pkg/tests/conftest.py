import numpy as np
import pytest

from anaconda_sim.objective import CoverageObjective, CoverageWorld


@pytest.fixture
def small_world():
    rng = np.random.default_rng(3)
    pos = rng.uniform(5, 25, size=(5, 2))
    return CoverageWorld(30.0, 30.0, 1.0, pos, 6.0, 4)


@pytest.fixture
def small_coverage(small_world):
    return CoverageObjective(small_world)


# one line per acceptance criterion, echoed in the terminal summary
CRITERIA_LINES = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA_LINES:
            terminalreporter.write_line(line)
