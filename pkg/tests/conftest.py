import os

import pytest
from hypothesis import HealthCheck, settings

from bcl import make_space

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def c0_space():
    """F = {1, inf}, theta = 1/4."""
    return make_space("1/4", [1, "inf"])


@pytest.fixture
def l2_space():
    """F = {1, 2}, theta = 1/4."""
    return make_space("1/4", [1, 2])


@pytest.fixture
def three_space():
    """F = {1, 3/2, 2}, theta = 1/4."""
    return make_space("1/4", [1, "3/2", 2])


SPACES = {
    "c0": ("1/4", [1, "inf"]),
    "l2": ("1/4", [1, 2]),
    "three": ("1/4", [1, "3/2", 2]),
    "four": ("1/5", ["4/3", 2, 3, "inf"]),
}


@pytest.fixture(params=sorted(SPACES))
def any_space(request):
    theta, ps = SPACES[request.param]
    return make_space(theta, ps)


# -- acceptance report ---------------------------------------------------------

ACCEPTANCE_LINES: dict[int, str] = {}


def record_acceptance(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
