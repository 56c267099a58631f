import os
import sys

import numpy as np
import pytest

# Add the source directory to Python path to import maxangle
sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'source'))

from maxangle.geometry import Simplex, regular_simplex


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-size sweeps, deselect with -m 'not slow'")


@pytest.fixture
def right_triangle():
    return Simplex([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


@pytest.fixture
def equilateral_triangle():
    return regular_simplex(2)


@pytest.fixture
def regular_tetrahedron():
    return regular_simplex(3)


@pytest.fixture
def corner_simplex():
    """conv{0, e_1, ..., e_d} for a given d."""

    def make(d: int) -> Simplex:
        return Simplex(np.vstack([np.zeros(d), np.eye(d)]))

    return make


@pytest.fixture
def rotation():
    """Random orthogonal d x d matrix from a seeded generator."""

    def make(d: int, seed: int = 0) -> np.ndarray:
        q, r = np.linalg.qr(np.random.default_rng(seed).standard_normal((d, d)))
        return q * np.sign(np.diag(r))

    return make


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
