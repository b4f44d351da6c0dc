from functools import lru_cache

import pytest
from hypothesis import HealthCheck, settings

from phasesync import corpus
from phasesync.density import solve_density

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: dict[int, str] = {}


@lru_cache(maxsize=None)
def cached(name: str, rho: float = 1.0):
    m = corpus.models(rho)[name]
    return m, solve_density(m)


@pytest.fixture
def standard():
    return cached("2+sin")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
