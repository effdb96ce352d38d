import os

import pytest
from hypothesis import HealthCheck, settings

from nccech.coeff import Window
from nccech.examples import p1, p1_spec, quantum_spec
from nccech.scheme import DeformationTower

settings.register_profile(
    "nccech", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "nccech"))

WORKSPACES = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "workspaces")


@pytest.fixture(scope="session")
def P1():
    return p1()


@pytest.fixture(scope="session")
def W6():
    return Window.interval(-6, 6)


@pytest.fixture(scope="session")
def trivial_tower():
    return DeformationTower.from_spec(p1_spec(), 3)


@pytest.fixture(scope="session")
def graded_tower():
    return DeformationTower.from_spec(p1_spec(t_weight=(1,)), 3)


@pytest.fixture(scope="session")
def quantum_tower():
    return DeformationTower.from_spec(quantum_spec(), 3)


@pytest.fixture(scope="session")
def workspace_path():
    return lambda name: os.path.join(WORKSPACES, name)


# ---------------------------------------------------------------------------
# acceptance criteria: one PASS/FAIL line each, printed in the terminal summary

_ACCEPTANCE_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = {}


@pytest.fixture
def acceptance(request):
    results = request.config.stash[_ACCEPTANCE_KEY]

    def record(number, ok, detail):
        results[number] = (ok, detail)
        print("criterion %2d: %s  %s" % (number, "PASS" if ok else "FAIL", detail))

    return record


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_ACCEPTANCE_KEY, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, detail = results[number]
        terminalreporter.write_line("criterion %2d: %s  %s" % (number, "PASS" if ok else "FAIL", detail))
