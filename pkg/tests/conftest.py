import sys
import warnings

import pytest

warnings.filterwarnings("ignore", message=".*TBB.*")

from tvball.geometry import canonicalize  # noqa: E402
from tvball.thresholds import breakpoints  # noqa: E402


@pytest.fixture(scope="session")
def fig():
    """The unequal configuration r1=1.2, r2=1, d=0.05 used throughout."""
    return canonicalize(1.2, 1.0, 0.05)


@pytest.fixture(scope="session")
def fig_T(fig):
    return breakpoints(fig)


@pytest.fixture(scope="session")
def sym():
    return canonicalize(1.0, 1.0, 0.1)


@pytest.fixture(scope="session")
def small2():
    """Touching balls with a small second radius (ratio_ge case)."""
    return canonicalize(1.0, 0.3, 0.0)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "SUMMARY", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
