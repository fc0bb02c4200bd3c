import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from monoflow.problems import build_sfp, build_vi, build_vi_literal

settings.register_profile(
    "monoflow", deadline=None, max_examples=60, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("monoflow")


@pytest.fixture(scope="session")
def sfp():
    return build_sfp()


@pytest.fixture(scope="session")
def vi():
    return build_vi()


@pytest.fixture(scope="session")
def vi_literal():
    return build_vi_literal()


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number][1])
