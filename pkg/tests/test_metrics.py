"""Distance and complexity measurement."""

import numpy as np
import pytest

from polyapprox.bodies import ball_polytope, cube_polytope
from polyapprox.errors import NotNested, PointOutsideBody
from polyapprox.geometry import VPolytope
from polyapprox.lattice import face_lattice
from polyapprox.metrics import (
    complexity,
    delta_and_ray,
    dist_point_polytope,
    hausdorff_inner,
)


def test_dist_point_polytope_square():
    sq = VPolytope(cube_polytope(2, 2.0).V)
    assert dist_point_polytope(np.array([2.0, 0.0]), sq) == pytest.approx(1.0)
    assert dist_point_polytope(np.array([0.3, -0.2]), sq) == 0.0
    assert dist_point_polytope(np.array([2.0, 2.0]), sq) == pytest.approx(
        np.sqrt(2.0))


def test_hausdorff_square_diamond():
    sq = cube_polytope(2, 2.0)
    diamond = VPolytope(np.array([[1, 0], [0, 1], [-1, 0], [0, -1.0]]))
    assert hausdorff_inner(sq, diamond) == pytest.approx(1 / np.sqrt(2))
    assert hausdorff_inner(sq, VPolytope(sq.V)) == 0.0


def test_hausdorff_disk_inscribed_square():
    disk = ball_polytope(2, 0.5, 0.001)
    r = 0.5 * (1 - 5e-4)  # keep the square inside the discretized disk
    sq = VPolytope(r * np.array([[1, 1], [-1, 1], [-1, -1], [1, -1.0]])
                   / np.sqrt(2))
    expected = 0.5 * (1 - 1 / np.sqrt(2))
    assert hausdorff_inner(disk, sq) == pytest.approx(expected, abs=2e-3)


def test_hausdorff_not_nested():
    sq = cube_polytope(2, 1.0)
    big = VPolytope(cube_polytope(2, 3.0).V)
    with pytest.raises(NotNested):
        hausdorff_inner(sq, big)


def test_delta_and_ray_disk():
    disk = ball_polytope(2, 0.5, 0.002)
    dlt, ray = delta_and_ray(disk, np.array([0.25, 0.0]))
    assert dlt == pytest.approx(0.25, abs=1e-3)
    assert ray == pytest.approx(0.25, abs=1e-3)
    # center convention: ray := delta
    d0, r0 = delta_and_ray(disk, np.zeros(2))
    assert d0 == r0
    with pytest.raises(PointOutsideBody):
        delta_and_ray(disk, np.array([1.0, 0.0]))


def test_ray_delta_inequality(rng):
    from polyapprox.bodies import random_hull_polytope
    from polyapprox.canonical import canonicalize

    for d in (2, 3):
        for seed in (5, 6):
            cb = canonicalize(random_hull_polytope(d, 15, seed))
            V = cb.body.V
            for _ in range(200):
                w = rng.exponential(size=len(V))
                w /= w.sum()
                x = w @ V
                dlt, ray = delta_and_ray(cb, x)
                assert ray <= d * dlt + 1e-9


def test_complexity_report():
    cube = face_lattice(VPolytope(cube_polytope(3, 1.0).V))
    rep = complexity(cube)
    assert rep.f_vector == (8, 12, 6)
    assert rep.total == 26
    ngon = face_lattice(VPolytope(ball_polytope(2, 0.5, 0.05).V))
    rep2 = complexity(ngon)
    assert rep2.f_vector[0] == rep2.f_vector[1]
    assert rep2.total == 2 * rep2.f_vector[0]
