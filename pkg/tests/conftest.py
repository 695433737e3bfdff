import numpy as np
import pytest

from incfilter.increments import IncrementSpec
from incfilter.spectra import DensityModel, ObservationModel, WeightFunction

F = DensityModel.rational([1.0], [1.0, 2.0, 1.0])
G = DensityModel.rational([1.0], [1.0, 1.0])
# zero-mean weight: A(0) = 0, so the power classes have a bounded worst case
ZERO_MEAN = WeightFunction.exppoly([(1.0, [1.0]), (2.0, [-2.0])])


@pytest.fixture
def model1():
    return ObservationModel(F, G, IncrementSpec(1, 1.0))


@pytest.fixture
def model2():
    return ObservationModel(F, G, IncrementSpec(2, 0.5))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
