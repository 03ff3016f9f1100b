import numpy as np
import pytest

from quadbeam import get_preset


@pytest.fixture(scope="session")
def preset():
    return get_preset("cs-6s-5d")


@pytest.fixture(scope="session")
def atom(preset):
    return preset.atom


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
