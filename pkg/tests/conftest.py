import os
import sys

import pytest
from hypothesis import HealthCheck, settings

from gmes.datum import ggs, make

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.function_scoped_fixture])
settings.load_profile("default")


@pytest.fixture(scope="session")
def pervova():
    return make(3, {1: [(1, 2)], 3: [(1, 2)]})


@pytest.fixture(scope="session")
def gs3():
    return ggs((1, 2))


@pytest.fixture(scope="session")
def gs5():
    return ggs((1, 2, 4, 3))


@pytest.fixture(scope="session")
def mixed5():
    return make(5, {1: [(1, 2, 4, 3)], 2: [(1, 0, 0, 0), (1, 0, 0, 1)]})


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(module.RESULTS):
        ok, detail = module.RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
