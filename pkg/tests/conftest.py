import math

import pytest
from hypothesis import HealthCheck, settings

from wvn_spectral import PotentialParams

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def free():
    return PotentialParams.free()


@pytest.fixture
def weak():
    # beta = 0.4 / (4 sin(pi/4)) ~ 0.141; small enough for quick runs
    return PotentialParams(0.4, math.pi / 4)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
