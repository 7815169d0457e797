import numpy as np
import pytest

from smoothdisc.core import SignVector, validate_komlos


def unit_columns(rng, d, n):
    G = rng.standard_normal((d, n))
    return validate_komlos(G / np.linalg.norm(G, axis=0))


def random_sign(rng, n):
    return SignVector(rng.choice(np.array([-1, 1], dtype=np.int8), size=n))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
