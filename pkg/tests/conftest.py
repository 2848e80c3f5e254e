import numpy as np
import pytest

from slowfast_spde.model import heat_example


@pytest.fixture(scope="session")
def heat32():
    """Acceptance-scale heat model: N = 32 modes, M = 64 grid points."""
    return heat_example(0.1, 0.1, 32)


@pytest.fixture(scope="session")
def heat8():
    """Small heat model for fast unit tests."""
    return heat_example(0.1, 0.1, 8)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260810)
