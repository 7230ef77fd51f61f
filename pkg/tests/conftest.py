import numpy as np
import pytest

from osasim import SystemParams


@pytest.fixture
def params():
    """Default parameter set used throughout the suite."""
    return SystemParams()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def fresh_rng(seed=1234):
    return np.random.default_rng(seed)
