import numpy as np
import pytest

from scissorsim import ModeRegistry


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def two_modes():
    return ModeRegistry.from_names(["a", "b"])
