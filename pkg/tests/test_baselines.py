"""Classical baselines: error guarantees and closed-form spot checks."""

import numpy as np
import pytest

from polyapprox.baselines import bronshteyn_ivanov, dudley, grid_hull
from polyapprox.bodies import ball_polytope, cube_polytope
from polyapprox.canonical import canonicalize
from polyapprox.errors import GridTooLarge
from polyapprox.geometry import VPolytope
from polyapprox.metrics import hausdorff_inner


@pytest.fixture(scope="module")
def disk():
    return canonicalize(ball_polytope(2, 0.5, 0.005), label="disk")


def test_closed_form_polygon_errors(disk):
    # tangent polygon: err = 0.5(sec(pi/n) - 1); n = 16 meets eps = 0.01
    n = 16
    assert 0.5 * (1 / np.cos(np.pi / n) - 1) < 0.01
    # inscribed polygon: err = 0.5(1 - cos(pi/n)); n = 16 meets eps = 0.01
    assert 0.5 * (1 - np.cos(np.pi / n)) < 0.01
    ang = 2 * np.pi * np.arange(n) / n + 0.1
    ngon = VPolytope(0.499 * np.column_stack([np.cos(ang), np.sin(ang)]))
    err = hausdorff_inner(disk.body, ngon)
    assert err == pytest.approx(0.5 * (1 - np.cos(np.pi / n)), abs=2e-3)


@pytest.mark.parametrize("eps", [0.1, 0.02])
def test_dudley_disk(disk, eps):
    res = dudley(disk, eps)
    assert res.hausdorff <= eps
    assert res.params["outer"]
    assert res.params["shrunk_hausdorff"] <= 2 * eps
    assert res.lattice.euler_ok


@pytest.mark.parametrize("eps", [0.1, 0.02])
def test_bronshteyn_ivanov_disk(disk, eps):
    res = bronshteyn_ivanov(disk, eps)
    assert res.hausdorff <= eps
    # inner approximation: vertices inside the body
    K = disk.body
    assert np.all(res.vertices @ K.A.T <= K.b[None, :] + 1e-7)


def test_grid_disk(disk):
    res = grid_hull(disk, 0.05)
    assert res.hausdorff <= 0.05
    K = disk.body
    assert np.all(res.vertices @ K.A.T <= K.b[None, :] + 1e-9)


def test_grid_square_coarse():
    sq = canonicalize(cube_polytope(2), label="square")
    res = grid_hull(sq, 0.5, c_g=1.0)
    # hull of the coarse grid is an axis box: 4 vertices, 4 edges
    assert res.lattice.f_vector == (4, 4)
    assert res.hausdorff <= 0.5


def test_grid_too_large(disk):
    with pytest.raises(GridTooLarge):
        grid_hull(disk, 1e-6)


def test_dudley_coarse_eps_small_count():
    ball = canonicalize(ball_polytope(3, 0.5, 0.1), label="ball")
    res = dudley(ball, 0.4)
    assert res.hausdorff <= 0.4
    assert res.lattice.f_vector[2] < 120


def test_baselines_d3_guarantees():
    ball = canonicalize(ball_polytope(3, 0.5, 0.05), label="ball")
    for fn in (dudley, bronshteyn_ivanov, grid_hull):
        res = fn(ball, 0.05)
        assert res.hausdorff <= 0.05, fn.__name__
        assert res.lattice.euler_ok
