import numpy as np
import pytest

from stein_bounds.config import DEFAULT_CONFIG


@pytest.fixture
def cfg():
    return DEFAULT_CONFIG


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
