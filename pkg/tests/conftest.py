import numpy as np
import pytest

from polyapprox.bodies import ball_polytope, cube_polytope, cylinder_polytope
from polyapprox.canonical import canonicalize


@pytest.fixture(scope="session")
def disk():
    return canonicalize(ball_polytope(2, 0.5, 0.02), label="disk")


@pytest.fixture(scope="session")
def ball3():
    return canonicalize(ball_polytope(3, 0.5, 0.05), label="ball")


@pytest.fixture(scope="session")
def square():
    return canonicalize(cube_polytope(2), label="square")


@pytest.fixture(scope="session")
def cube3():
    return canonicalize(cube_polytope(3), label="cube")


@pytest.fixture(scope="session")
def cylinder3():
    return canonicalize(cylinder_polytope(0.5, 1.0, 0.05), label="cylinder")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
