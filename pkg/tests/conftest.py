import numpy as np
import pytest

from core import SampleStreams


@pytest.fixture
def streams():
    return SampleStreams(0)


@pytest.fixture
def np_rng():
    return np.random.default_rng(1234)
