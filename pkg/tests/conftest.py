import os

import pytest
from hypothesis import HealthCheck, settings

from ehsched import Scenario

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", deadline=None, max_examples=200, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# filled by test_acceptance, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def unit():
    """1 J and 1 bit at t=0: r=1, T=1."""
    return Scenario.build([(0, 1)], [(0, 1)], 10)


@pytest.fixture
def two_packets():
    """C_max=1, two 1 J packets a second apart, 2 bits at t=0: r=1, T=2."""
    return Scenario.build([(0, 1), (1, 1)], [(0, 2)], 1)


@pytest.fixture
def forced_overflow():
    """The second packet cannot fit, so 0.5 J overflows at t=0.5."""
    return Scenario.build([(0, 1), (0.5, 1)], [(0, 0.5), (0.75, 1)], 1)


@pytest.fixture
def hopeless():
    """2 bits due by t=1 with 1 J: out of reach."""
    return Scenario.build([(0, 1)], [(0, 2)], 10, qos={"kind": "explicit", "params": {"jumps": [[1, 2]]}})
