import sys

import numpy as np
import pytest
from hypothesis import settings

from llg_inviscid.spectral_core import Grid

settings.register_profile("default", deadline=None, max_examples=25)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def grid1():
    return Grid.cube(16, 1)


@pytest.fixture(scope="session")
def grid2():
    return Grid.cube(32, 2)


@pytest.fixture(scope="session")
def grid3():
    return Grid.cube(16, 3)


@pytest.fixture(scope="session")
def grid32():
    return Grid.cube(32, 3)


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
