"""Core kernel: supports, predicates, sections, volumes, conversions."""

import numpy as np
import pytest

from polyapprox.bodies import ball_polytope, cube_polytope, random_hull_polytope
from polyapprox.errors import UnboundedBody
from polyapprox.geometry import (
    HPolytope,
    VPolytope,
    contains,
    gjk_distance,
    intersects,
    section_centroid,
    support,
    volume,
    volume_of_vertices,
)


def shifted(p: HPolytope, t):
    t = np.asarray(t, dtype=float)
    return HPolytope(p.A, p.b + p.A @ t)


def test_support_ball_radius():
    disk = ball_polytope(2, 0.5, 0.01)
    val, wit = support(disk, np.array([1.0, 0.0]))
    assert val == pytest.approx(0.5, abs=1e-4)
    assert np.linalg.norm(wit) <= 0.5 + 1e-12


def test_support_cube_corner():
    cube = cube_polytope(3, 2.0)
    u = np.array([1.0, 1.0, 1.0]) / np.sqrt(3)
    val, _ = support(cube, u)
    assert val == pytest.approx(np.sqrt(3.0), abs=1e-12)


def test_support_square_edge_witness():
    sq = cube_polytope(2, 2.0)
    val, wit = support(sq, np.array([1.0, 0.0]))
    assert val == pytest.approx(1.0)
    assert wit[0] == pytest.approx(1.0)


def test_intersects_disjoint_touching():
    a = cube_polytope(2, 1.0)
    far = shifted(a, [2.0, 0.0])
    touch = shifted(a, [1.0, 0.0])
    overlap = shifted(a, [0.5, 0.0])
    assert not intersects(a, far)
    assert intersects(a, touch)  # boundary touch counts
    assert intersects(a, overlap)


def test_contains_nested_boxes():
    outer = cube_polytope(2, 2.0)
    inner = cube_polytope(2, 1.0)
    assert contains(outer, inner)
    assert not contains(inner, outer)


def test_vertices_cube_count():
    cube = cube_polytope(3, 1.0)
    fresh = HPolytope(cube.A, cube.b)  # force H->V conversion
    assert len(fresh.V) == 8
    assert sorted(np.round(v @ v, 9) for v in fresh.V) == [0.75] * 8


def test_vertices_unbounded_raises():
    half = HPolytope(np.array([[1.0, 0.0]]), np.array([1.0]))
    with pytest.raises(UnboundedBody):
        _ = half.V


def test_macbeath_square_analytic():
    from polyapprox.macbeath import macbeath

    sq = cube_polytope(2, 2.0)
    reg = macbeath(sq, np.array([0.5, 0.0]), 1.0)
    got = sorted(map(tuple, np.round(reg.verts, 9)))
    assert got == [(0.0, -1.0), (0.0, 1.0), (1.0, -1.0), (1.0, 1.0)]
    reg5 = macbeath(sq, np.array([0.5, 0.0]), 0.2)
    got5 = sorted(map(tuple, np.round(reg5.verts, 9)))
    assert got5 == [(0.4, -0.2), (0.4, 0.2), (0.6, -0.2), (0.6, 0.2)]


def test_volume_cube_simplex_and_cap():
    cube = cube_polytope(3, 1.0)
    assert volume(cube) == pytest.approx(1.0, rel=1e-12)
    tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    assert volume_of_vertices(tri) == pytest.approx(0.5, rel=1e-12)
    # circular-segment volume: disk r=0.5, cap width 0.1
    disk = ball_polytope(2, 0.5, 0.0005)
    from polyapprox.macbeath import cap_of_width

    cap = cap_of_width(disk, np.array([0.0, 1.0]), 0.1)
    theta = np.arccos(0.8)
    expected = 0.25 * (theta - np.sin(theta) * np.cos(theta))
    assert volume_of_vertices(cap.vertex_set()) == pytest.approx(
        expected, rel=2e-3)


def test_section_centroids():
    disk = ball_polytope(2, 0.5, 0.002)
    c = section_centroid(disk, np.array([0.0, 1.0]), 0.4)
    assert c == pytest.approx([0.0, 0.4], abs=1e-4)
    sq = cube_polytope(2, 2.0)
    c2 = section_centroid(sq, np.array([1.0, 0.0]), 0.0)
    assert c2 == pytest.approx([0.0, 0.0], abs=1e-12)
    # unit simplex cut at x = 0.5: midpoint of {0.5} x [0, 0.5]
    from polyapprox.bodies import vpoly_to_hpoly

    simplex = vpoly_to_hpoly(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    c3 = section_centroid(simplex, np.array([1.0, 0.0]), 0.5)
    assert c3 == pytest.approx([0.5, 0.25], abs=1e-12)


def test_intersects_agrees_with_grid_bruteforce(rng):
    # desk-scale dichotomy check on random polygon pairs
    for trial in range(20):
        a = random_hull_polytope(2, 8, int(rng.integers(1 << 30)))
        t = rng.uniform(-1.5, 1.5, size=2)
        b = shifted(random_hull_polytope(2, 8, int(rng.integers(1 << 30))), t)
        got = intersects(a, b)
        xs = np.linspace(-4, 4, 161)
        X, Y = np.meshgrid(xs, xs)
        pts = np.column_stack([X.ravel(), Y.ravel()])
        ina = np.all(pts @ a.A.T <= a.b + 1e-9, axis=1)
        inb = np.all(pts @ b.A.T <= b.b + 1e-9, axis=1)
        brute = bool(np.any(ina & inb))
        if brute:
            assert got  # grid hit is a certificate of intersection
        elif not got:
            assert gjk_distance(a.V, b.V) > 0


def test_hv_roundtrip_support(rng):
    from polyapprox.bodies import vpoly_to_hpoly

    for d in (2, 3):
        p = random_hull_polytope(d, 14, 7 + d)
        back = vpoly_to_hpoly(HPolytope(p.A, p.b).V)
        U = rng.standard_normal((1000, d))
        U /= np.linalg.norm(U, axis=1)[:, None]
        h1 = np.max(U @ p.V.T, axis=1)
        h2 = np.max(U @ back.V.T, axis=1)
        assert np.max(np.abs(h1 - h2)) < 1e-7


def test_volume_affine_transform(rng):
    for d in (2, 3):
        p = random_hull_polytope(d, 12, 3 + d)
        v0 = volume(p)
        T = rng.standard_normal((d, d))
        while abs(np.linalg.det(T)) < 0.1:
            T = rng.standard_normal((d, d))
        v1 = volume_of_vertices(p.V @ T.T)
        assert v1 == pytest.approx(abs(np.linalg.det(T)) * v0, rel=1e-9)


def test_gjk_known_distances():
    P = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    assert gjk_distance(P, P + np.array([3.0, 0.0])) == pytest.approx(2.0)
    assert gjk_distance(P, P + np.array([0.5, 0.0])) == 0.0
    # diagonal separation
    Q = P + np.array([2.0, 2.0])
    assert gjk_distance(P, Q) == pytest.approx(np.sqrt(2 * 1.5 ** 2), rel=1e-9)
