import numpy as np
import pytest

from solenoid_walk.distribution import make_distribution
from solenoid_walk.group import Arithmetic, GroupSequence


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def a2():
    return GroupSequence.constant(2)


@pytest.fixture
def a3():
    return GroupSequence.constant(3)


@pytest.fixture
def a234():
    return GroupSequence((2, 3, 4))


@pytest.fixture
def a_growing():
    """a_n = n + 1."""
    return GroupSequence((2,), Arithmetic(1))


@pytest.fixture
def recurrent(a2):
    return make_distribution({"family": "solenoid_matched", "kappa": 2}, a2)


@pytest.fixture
def transient(a2):
    return make_distribution({"family": "geometric", "r": "1/2"}, a2)


@pytest.fixture
def unit_steps(a2):
    return make_distribution({"family": "finite_support", "table": {"0": 1.0}}, a2)
