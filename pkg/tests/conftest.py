import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from twowell.wellsgeo import TwoWellParams

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

MID = np.array([[0.7, -0.6], [0.15, 1.3]])


@pytest.fixture
def params():
    return TwoWellParams(0.5)


@pytest.fixture
def mid():
    return MID.copy()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
