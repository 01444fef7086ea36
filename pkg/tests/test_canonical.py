"""Canonical form: MVEE, sandwich invariants, transform round trips."""

import numpy as np
import pytest

from polyapprox.bodies import (
    ball_polytope,
    cube_polytope,
    random_hull_polytope,
    vpoly_to_hpoly,
)
from polyapprox.canonical import canonicalize, mvee
from polyapprox.errors import DegenerateInput
from polyapprox.geometry import HPolytope


def test_mvee_cube_is_ball():
    V = cube_polytope(3, 2.0).V
    e = mvee(V)
    assert e.center == pytest.approx([0, 0, 0], abs=1e-6)
    # shape = I/3 means radius sqrt(3)
    assert e.shape == pytest.approx(np.eye(3) / 3.0, abs=1e-6)


def test_mvee_square_is_ball():
    V = cube_polytope(2, 2.0).V
    e = mvee(V)
    assert e.shape == pytest.approx(np.eye(2) / 2.0, abs=1e-6)


def test_mvee_degenerate_raises():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    with pytest.raises(DegenerateInput):
        mvee(pts)


def test_mvee_random_hull_john_containment(rng):
    p = random_hull_polytope(2, 20, 42)
    e = mvee(p.V)
    vals = np.einsum("ij,jk,ik->i", p.V - e.center, e.shape, p.V - e.center)
    assert np.max(vals) <= 1.0 + 1e-6      # hull ⊆ E
    w, Q = np.linalg.eigh(e.shape)
    Ainv = Q @ np.diag(1.0 / w) @ Q.T
    lhs = p.A @ e.center + np.sqrt(
        np.einsum("ij,jk,ik->i", p.A, Ainv, p.A)) / 2.0
    assert np.all(lhs <= p.b + 1e-7)       # E/d ⊆ hull


def test_ball_already_canonical():
    cb = canonicalize(ball_polytope(3, 0.5, 0.05))
    assert np.allclose(cb.to_canonical.matrix, np.eye(3))
    assert cb.r_in >= 1.0 / 6.0 - 1e-9


def test_thin_box_canonicalizes():
    thin = HPolytope(np.vstack([np.eye(2), -np.eye(2)]),
                     np.array([0.5, 0.01, 0.5, 0.01]))
    cb = canonicalize(thin)
    assert cb.r_out == pytest.approx(0.5, abs=1e-12)
    assert cb.r_in >= 0.25 - 1e-9
    V = cb.body.V
    assert np.max(np.linalg.norm(V, axis=1)) <= 0.5 + 1e-12


@pytest.mark.parametrize("d", [2, 3])
def test_random_hull_sandwich(d, rng):
    for seed in (1, 2, 3):
        cb = canonicalize(random_hull_polytope(d, 16, seed))
        assert cb.r_in >= 1.0 / (2 * d) * (1 - 1e-5)
        assert cb.r_out <= 0.5 + 1e-12


def test_unit_diameter_triangle_sandwich():
    tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
    cb = canonicalize(vpoly_to_hpoly(tri))
    assert cb.r_in >= 0.25 * (1 - 1e-5)   # John bound is tight for simplices
    assert cb.r_out <= 0.5 + 1e-12


def test_round_trip_identity(rng):
    cb = canonicalize(random_hull_polytope(3, 18, 11))
    pts = rng.standard_normal((100, 3))
    back = cb.from_canonical.apply(cb.to_canonical.apply(pts))
    assert np.max(np.abs(back - pts)) < 1e-9


def test_error_transport(rng):
    # Hausdorff transport under the inverse map is bounded by 1/sigma_min
    from polyapprox.geometry import VPolytope
    from polyapprox.metrics import hausdorff_inner

    raw = random_hull_polytope(2, 18, 5)
    cb = canonicalize(raw)
    inner = VPolytope(0.9 * cb.body.V)
    e_canon = hausdorff_inner(cb.body, inner)
    orig_inner = cb.from_canonical.apply(inner.vertices)
    e_orig = hausdorff_inner(raw, orig_inner)
    smin = float(np.min(np.linalg.svd(cb.to_canonical.matrix,
                                      compute_uv=False)))
    assert e_orig <= e_canon / smin + 1e-9
    assert cb.eps_scale == pytest.approx(smin)
