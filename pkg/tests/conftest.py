import pytest

from dqssa.analysis import run_all
from dqssa.integrator import SolverConfig

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def default_runs():
    """All five systems at dt = 1e-3 h over 300 h (about 20 s on 5 threads)."""
    return run_all(SolverConfig())


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
