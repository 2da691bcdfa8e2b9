import math

import pytest

from scissorkin.deploy_sim import DriveProfile, simulate
from scissorkin.mech_model import four_bar, reference_unit


@pytest.fixture(scope="session")
def unit():
    return reference_unit()


@pytest.fixture(scope="session")
def fourbar():
    return four_bar()


@pytest.fixture(scope="session")
def deploy_log(unit):
    return simulate(unit, DriveProfile(), 0.05)


@pytest.fixture(scope="session")
def cycle_log(unit):
    return simulate(unit, DriveProfile(cycle=True), 0.05)


@pytest.fixture(scope="session")
def design_range():
    return math.radians(12.54), math.radians(80.0)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
