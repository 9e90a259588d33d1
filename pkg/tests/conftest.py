import numpy as np
import pytest

from berrygyro.model import detuned_scenario, near_resonant_scenario


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def near():
    return near_resonant_scenario()


@pytest.fixture(scope="session")
def detuned():
    return detuned_scenario()


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
