import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from normsol import CombinedPower, ExpCritical, make_grid

settings.register_profile(
    "normsol", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("normsol")

_ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = {}


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_ACCEPTANCE, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        ok, detail = results[k]
        terminalreporter.write_line(f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def acceptance(request):
    """Record (criterion, passed, detail); printed now and in the terminal summary."""
    results = request.config.stash[_ACCEPTANCE]

    def record(k, ok, detail):
        results[k] = (bool(ok), detail)
        print(f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return record


@pytest.fixture(scope="session")
def grid3():
    return make_grid(3, 20.0, 2000)


@pytest.fixture(scope="session")
def grid2():
    return make_grid(2, 20.0, 2000)


@pytest.fixture(scope="session")
def small_geo3():
    return make_grid(3, 40.0, 2000, "geometric", 1.002)


@pytest.fixture(scope="session")
def small_geo2():
    return make_grid(2, 40.0, 2000, "geometric", 1.002)


@pytest.fixture(scope="session")
def power_model():
    return CombinedPower(50.0, 4.0, 3)


@pytest.fixture(scope="session")
def exp_model():
    return ExpCritical(100.0, 6.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
