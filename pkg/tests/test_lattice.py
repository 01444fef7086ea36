"""Face lattices: known f-vectors, merging, Euler relation."""

import numpy as np
import pytest

from polyapprox.bodies import ball_polytope, cube_polytope, random_hull_polytope
from polyapprox.errors import DegenerateInput
from polyapprox.geometry import VPolytope
from polyapprox.lattice import face_lattice


def test_cube_octahedron_simplex():
    assert face_lattice(VPolytope(cube_polytope(3).V)).f_vector == (8, 12, 6)
    octa = VPolytope(np.vstack([np.eye(3), -np.eye(3)]))
    assert face_lattice(octa).f_vector == (6, 12, 8)
    simp3 = VPolytope(np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0],
                                [0, 0, 1.0]]))
    assert face_lattice(simp3).f_vector == (4, 6, 4)
    tri = VPolytope(np.array([[0, 0], [1, 0], [0, 1.0]]))
    assert face_lattice(tri).f_vector == (3, 3)


def test_coplanar_merge():
    V = cube_polytope(3).V
    extra = np.array([[0.5, 0.0, 0.0], [0.5, 0.25, 0.0], [0.5, 0.0, 0.25],
                      [0.5, -0.3, 0.1]])
    lat = face_lattice(VPolytope(np.vstack([V, extra])))
    assert lat.f_vector == (8, 12, 6)
    assert lat.euler_ok


def test_euler_on_random_hulls():
    for seed in range(6):
        p = random_hull_polytope(3, 30, seed)
        lat = face_lattice(VPolytope(p.V))
        assert lat.euler_ok
        f0, f1, f2 = lat.f_vector
        assert f0 - f1 + f2 == 2


def test_incidence_consistency():
    lat = face_lattice(VPolytope(cube_polytope(3).V))
    # every edge smaller-dim face's vertex set inside some facet's
    for ends in lat.faces[1]:
        hit = any(set(ends) <= set(f) for f in lat.faces[2])
        assert hit
    # vertex -> edge incidence degrees of a cube are 3
    assert all(len(e) == 3 for e in lat.incidence[0])


def test_ngon_lattice():
    disk = ball_polytope(2, 0.5, 0.05)
    lat = face_lattice(VPolytope(disk.V))
    n = len(disk.V)
    assert lat.f_vector == (n, n)


def test_degenerate_raises():
    with pytest.raises(DegenerateInput):
        face_lattice(VPolytope(np.array([[0.0, 0], [1, 0], [2, 0.0]]),
                               canonicalize=False))
