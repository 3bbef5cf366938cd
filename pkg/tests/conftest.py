import numpy as np
import pytest

from qrgames import SteeringGameSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def ideal_spec():
    return SteeringGameSpec.ideal()
