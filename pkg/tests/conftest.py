import logging

import numpy as np
import pytest

from pvmw_dp.core import BeliefState, Dataset, Example, TabularQuery

log = logging.getLogger("pvmw_dp")
log.setLevel(logging.DEBUG)


def unit_ball_values(rng, shape):
    """Random vectors inside the unit ball, last axis is the dimension."""
    values = rng.standard_normal(shape)
    values /= np.linalg.norm(values, axis=-1, keepdims=True)
    return values * rng.random(shape[:-1] + (1,)) ** (1.0 / shape[-1])


def indexed_dataset(private_values, k):
    return Dataset([Example((i,), int(y)) for i, y in enumerate(private_values)], k)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_dataset():
    """n=5, k=3, public index only."""
    return indexed_dataset([0, 2, 1, 1, 0], 3)


@pytest.fixture
def random_query(rng, small_dataset):
    return TabularQuery(unit_ball_values(rng, (small_dataset.n, small_dataset.k, 4)), name='random')


@pytest.fixture
def dirichlet_beliefs(rng, small_dataset):
    return BeliefState(rng.dirichlet(np.ones(small_dataset.k), size=small_dataset.n))


@pytest.fixture
def truth_indicator():
    """Factory of the d=1 query scoring +1 on every example's true value and -1 elsewhere."""

    def _truth_indicator(dataset):
        values = -np.ones((dataset.n, dataset.k, 1))
        values[np.arange(dataset.n), dataset.private_values, 0] = 1.0
        return TabularQuery(values, name='truth indicator')

    return _truth_indicator
