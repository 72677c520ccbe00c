import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def rand_pd(rng, n, floor=0.1):
    g = crandn(rng, n, n)
    h = g.conj().T @ g + floor * np.eye(n)
    return (h + h.conj().T) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
