import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mtnufft.grid import SignalBand, make_band_plan
from mtnufft.simkit import generate_grid, paper_config

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

SCHEMES = ("uniform", "jitter", "missing", "arithmetic")


@pytest.fixture(scope="session")
def paper_grids():
    return {s: generate_grid(paper_config(s, seed=0)) for s in SCHEMES}


@pytest.fixture(scope="session")
def signal_band():
    return SignalBand(0.5)


@pytest.fixture(scope="session")
def paper_plan():
    return make_band_plan(0.5, 0.05)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance criteria record one line each; printed after the run so the
# verdicts are visible even when test output is captured
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
