"""Shared generators for randomized tests."""

import numpy as np
import pytest

from opsyskit import BlockShape, build_system
from opsyskit.gallery import diagonal_algebra, matrix_algebra
from opsyskit.linalg import random_hermitian

SHAPE_POOL = [
    (2,),
    (3,),
    (1, 2),
    (1, 1, 1),
    (1, 1, 2),
]


def random_system(rng, max_generators=2, name="S"):
    shape = BlockShape(SHAPE_POOL[int(rng.integers(len(SHAPE_POOL)))])
    gens = [random_hermitian(rng, shape) for _ in range(int(rng.integers(1, max_generators + 1)))]
    return build_system(shape, gens, name)


def random_indefinite(S, rng, min_spread=0.2):
    """Hermitian element of S with symmetric spectrum (neither PSD nor NSD)."""
    for _ in range(50):
        c = rng.normal(size=S.dim)
        y = sum(ci * B for ci, B in zip(c, S.basis))
        w = np.linalg.eigvalsh(y)
        y = y - ((w[0] + w[-1]) / 2.0) * S.unit
        if np.linalg.norm(y) > min_spread:
            return y
    raise AssertionError("could not draw an indefinite element")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def m2():
    return matrix_algebra(2, "M2")


@pytest.fixture
def l3():
    return diagonal_algebra(3, "l3")


@pytest.fixture
def l4():
    return diagonal_algebra(4, "l4")
