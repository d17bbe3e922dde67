import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hausdorff_lab import _backend, presets

settings.register_profile("ci", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


@pytest.fixture(scope="session")
def cesaro():
    return presets.build_preset("cesaro1d")


@pytest.fixture(scope="session")
def dyadic():
    return presets.build_preset("discrete-dyadic")


@pytest.fixture(scope="session")
def identity():
    return presets.build_preset("identity")


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


@pytest.fixture(params=["numba", "numpy"])
def each_backend(request):
    prev = _backend.use_backend(request.param)
    yield request.param
    _backend.use_backend(prev)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
