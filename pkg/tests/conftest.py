import numpy as np
import pytest

from graphdtn import default_corpus


@pytest.fixture(scope="session")
def corpus():
    return default_corpus()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
