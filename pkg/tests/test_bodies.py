"""Body file format and generators."""

import numpy as np
import pytest

from polyapprox.bodies import make_body, named_body
from polyapprox.errors import ValidationError
from polyapprox.geometry import volume


def test_hpoly_roundtrip():
    spec = {"dim": 2, "kind": "hpoly",
            "A": [[1, 0], [-1, 0], [0, 1], [0, -1]],
            "b": [0.5, 0.5, 0.5, 0.5]}
    p = make_body(spec, 0.05)
    assert len(p.V) == 4
    assert volume(p) == pytest.approx(1.0)


def test_vpoly_builds_hull():
    spec = {"dim": 2, "kind": "vpoly",
            "vertices": [[0, 0], [1, 0], [0, 1], [0.2, 0.2]]}
    p = make_body(spec, 0.05)
    assert len(p.V) == 3  # interior point dropped by hull canonicalization


def test_ball_and_ellipsoid():
    b = make_body({"dim": 2, "kind": "ball", "radius": 0.5}, 0.02)
    assert volume(b) == pytest.approx(np.pi * 0.25, rel=1e-2)
    e = make_body({"dim": 2, "kind": "ellipsoid", "semi_axes": [0.5, 0.25]},
                  0.02)
    assert volume(e) == pytest.approx(np.pi * 0.125, rel=1e-2)


def test_generators():
    g = make_body({"dim": 3, "kind": "generator", "name": "cube"}, 0.05)
    assert volume(g) == pytest.approx(1.0)
    cyl = make_body({"dim": 3, "kind": "generator", "name": "cylinder"}, 0.05)
    assert volume(cyl) == pytest.approx(np.pi * 0.25, rel=2e-2)
    rh = make_body({"dim": 2, "kind": "generator", "name": "random-hull",
                    "seed": 7, "npoints": 12}, 0.05)
    rh2 = make_body({"dim": 2, "kind": "generator", "name": "random-hull",
                     "seed": 7, "npoints": 12}, 0.05)
    assert np.array_equal(rh.V, rh2.V)  # seeded determinism


def test_named_bodies_cover_the_matrix():
    for name, d in [("disk", 2), ("ellipse", 2), ("square", 2),
                    ("ball", 3), ("cube", 3), ("cylinder", 3)]:
        p = named_body(name, d, 0.05)
        assert p.dim == d
        assert len(p.V) >= d + 1


def test_validation_errors():
    with pytest.raises(ValidationError):
        make_body({"dim": 2, "kind": "nope"}, 0.05)
    with pytest.raises(ValidationError):
        make_body({"dim": 3, "kind": "generator", "name": "torus"}, 0.05)
    with pytest.raises(ValidationError):
        named_body("cylinder", 2, 0.05)
    with pytest.raises(ValidationError):
        named_body("disk", 2, 0.0)
