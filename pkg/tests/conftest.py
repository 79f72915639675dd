import functools
import math

import pytest
from hypothesis import settings

import numpy as np

from bellstab import DriveParams, SystemParams, build_model, evolve, initial_state, steady_state

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

INF = math.inf
DEVICE = SystemParams()
IDEAL = SystemParams.ideal()
NOMINAL = DriveParams()


@functools.lru_cache(maxsize=None)
def cached_steady(sys: SystemParams = DEVICE, drives: DriveParams = NOMINAL, tol: float = 1e-6,
                  t_final: float = 10.0):
    """Steady states are expensive (seconds each), so each one is computed once per session."""
    return steady_state(build_model(sys, drives), t_final, tol=tol)


@pytest.fixture(scope="session")
def full_steady():
    return cached_steady(DEVICE)


@pytest.fixture(scope="session")
def ideal_steady():
    return cached_steady(IDEAL)


@pytest.fixture(scope="session")
def full_trajectory():
    """Full model from |gg, 0> to 10 us, sampled every 100 ns."""
    return evolve(build_model(DEVICE, NOMINAL), initial_state(DEVICE), 10.0, tol=1e-6,
                  times=np.round(np.arange(101) * 0.1, 10))


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: int(k)):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
