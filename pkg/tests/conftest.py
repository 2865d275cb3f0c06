"""Shared fixtures and helpers for the test suite."""

import numpy as np
import pytest

from rfvimp import Dataset, SeedSpec


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def seed():
    return SeedSpec(777)


def make_dataset(n=60, p=4, n1=None, rng_seed=5):
    """Small separable dataset: class-1 rows shifted in column 0."""
    rng = np.random.default_rng(rng_seed)
    n1 = n // 2 if n1 is None else n1
    n0 = n - n1
    X = rng.normal(size=(n, p))
    X[n0:, 0] += 1.5
    y = np.concatenate([np.zeros(n0, dtype=np.int8),
                        np.ones(n1, dtype=np.int8)])
    return Dataset(X, y)
