import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bcnoma import SystemConfig, draw_realization

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def config():
    return SystemConfig()


@pytest.fixture(scope="session")
def realizations(config):
    return [draw_realization(config, s) for s in range(40)]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
