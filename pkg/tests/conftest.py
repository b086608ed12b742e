from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from cthd import samples

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def sequential():
    return samples.three_tasks(concurrent=False)


@pytest.fixture
def concurrent():
    return samples.three_tasks(concurrent=True)


@pytest.fixture
def nested():
    return samples.nested()


def names(plan, problem):
    return [sorted(layer) for layer in plan.names(problem)]


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS, key=lambda x: int(x.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
