import pytest

from tripent.core import ExperimentParams
from tripent.spdc import PhaseMatchSolution, gaussian_triphoton_state


@pytest.fixture(scope="session")
def default_state():
    """Gaussian state at sigma_p = 1 mm, L_z = 3 mm, k_p_tilde = 2.6e7 rad/m."""
    return gaussian_triphoton_state(PhaseMatchSolution.from_k_p_tilde(2.6e7, 3e-3), 1e-3)


@pytest.fixture(scope="session")
def default_params():
    return ExperimentParams()


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.line(line)
