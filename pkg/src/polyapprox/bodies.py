"""Input bodies: JSON format, generators, and smooth-body discretization.

Body file format (JSON)::

    {"dim": d, "kind": "hpoly",     "A": [[...], ...], "b": [...]}
    {"dim": d, "kind": "vpoly",     "vertices": [[...], ...]}
    {"dim": d, "kind": "ball",      "radius": 0.5}
    {"dim": d, "kind": "ellipsoid", "semi_axes": [...]}
    {"dim": d, "kind": "generator", "name": "cube"|"ball"|"cylinder"|"random-hull",
                                    "seed": 1, "npoints": 20}

Smooth bodies (ball, ellipsoid, cylinder profile) enter the pipeline as
H-polytopes of supporting hyperplanes on a direction net whose spacing is
chosen so the discretization sagitta is eps/50 — far below every error the
pipeline reports at tolerance eps.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull

from .errors import DegenerateInput, ValidationError
from .geometry import HPolytope, hull_vertices, normalize_halfspaces
from .nets import circle_net, fibonacci_sphere

GENERATORS = ("cube", "ball", "cylinder", "random-hull")


FACET_CAP = 300_000


def disc_spacing(eps: float, radius: float) -> float:
    """Angular spacing giving supporting-hyperplane sagitta eps/50."""
    if not 0.0 < eps < 1.0:
        raise ValidationError("eps must lie in (0, 1)")
    return float(np.sqrt(eps / (25.0 * radius)))


def _check_facets(n: int) -> None:
    if n > FACET_CAP:
        raise ValidationError(
            f"smooth-body discretization would need {n} facets")


def ball_polytope(d: int, radius: float, eps: float) -> HPolytope:
    """Tangent-plane polytope of a ball, shrunk to fit B(0, radius) exactly.

    The circumscribed polytope's vertices poke past the sphere by the
    sagitta; rescaling by max-vertex-norm keeps the body inside B(0, radius)
    so a radius-1/2 ball is canonical under the identity map.
    """
    theta = disc_spacing(eps, radius)
    if d == 2:
        n = max(8, int(np.ceil(2.0 * np.pi / theta)))
        _check_facets(n)
        U = circle_net(n)
        # adjacent tangent lines meet at radius r/cos(pi/n)
        rv = radius / np.cos(np.pi / n)
        mid = 2.0 * np.pi * (np.arange(n) + 0.5) / n
        V = rv * np.column_stack([np.cos(mid), np.sin(mid)])
        s = radius / rv
        return HPolytope(U, np.full(n, radius * s), vertices=V * s,
                         normalize=False)
    if d == 3:
        n = max(64, int(np.ceil((2.9 / theta) ** 2)))
        _check_facets(n)
        U = fibonacci_sphere(n)
        hull = ConvexHull(U)
        eq = hull.equations
        # dual of points on the sphere: one polytope vertex per hull facet,
        # and facet adjacency of hull(U) is exactly vertex adjacency here
        w = eq[:, :3]
        h = -eq[:, 3]
        V = radius * w / h[:, None]
        s = radius / float(np.max(np.linalg.norm(V, axis=1)))
        p = HPolytope(U, np.full(n, radius * s), vertices=V * s,
                      normalize=False)
        nf = len(V)
        p.set_adjacency(np.arange(0, 3 * nf + 1, 3), hull.neighbors.ravel())
        return p
    raise ValidationError("ball generator supports d in {2, 3}")


def ellipsoid_polytope(semi_axes, eps: float) -> HPolytope:
    """Axis-aligned ellipsoid, discretized as the affine image of a ball."""
    a = np.asarray(semi_axes, dtype=float)
    d = len(a)
    if np.any(a <= 0):
        raise ValidationError("semi-axes must be positive")
    ball = ball_polytope(d, 1.0, eps / float(np.max(a)))
    # image of {<u,z> <= 1} under z -> diag(a) z is {<u/a, y> <= 1}
    A = ball.A / a[None, :]
    V = ball.V * a[None, :]
    A, b = normalize_halfspaces(A, np.ones(len(A)))
    return HPolytope(A, b, vertices=V, normalize=False)


def cube_polytope(d: int, side: float = 1.0) -> HPolytope:
    A = np.vstack([np.eye(d), -np.eye(d)])
    b = np.full(2 * d, side / 2.0)
    corners = np.array(np.meshgrid(*[[-side / 2.0, side / 2.0]] * d)).T.reshape(-1, d)
    return HPolytope(A, b, vertices=corners, normalize=False)


def cylinder_polytope(radius: float, height: float, eps: float) -> HPolytope:
    """Flat-capped cylinder (d=3), circular profile discretized."""
    theta = disc_spacing(eps, radius)
    n = max(16, int(np.ceil(2.0 * np.pi / theta)))
    _check_facets(n)
    ring_dirs = circle_net(n)
    A = np.vstack([
        np.column_stack([ring_dirs, np.zeros(n)]),
        [[0.0, 0.0, 1.0]],
        [[0.0, 0.0, -1.0]],
    ])
    rv = radius / np.cos(np.pi / n)
    mid = 2.0 * np.pi * (np.arange(n) + 0.5) / n
    ring = rv * np.column_stack([np.cos(mid), np.sin(mid)])
    s = radius / rv
    V = np.vstack([
        np.column_stack([ring * s, np.full(n, height / 2.0)]),
        np.column_stack([ring * s, np.full(n, -height / 2.0)]),
    ])
    b = np.concatenate([np.full(n, radius * s), [height / 2.0, height / 2.0]])
    p = HPolytope(A, b, vertices=V, normalize=False)
    # prism adjacency: ring neighbors plus the vertical edge
    ar = np.arange(n)
    top = np.column_stack([(ar - 1) % n, (ar + 1) % n, ar + n])
    bot = np.column_stack([n + (ar - 1) % n, n + (ar + 1) % n, ar])
    p.set_adjacency(np.arange(0, 6 * n + 1, 3), np.vstack([top, bot]).ravel())
    return p


def random_hull_polytope(d: int, npoints: int, seed: int) -> HPolytope:
    rng = np.random.default_rng(seed)
    if npoints < d + 1:
        raise DegenerateInput("need at least d+1 points")
    P = rng.standard_normal((npoints, d))
    return vpoly_to_hpoly(P)


def vpoly_to_hpoly(points: np.ndarray) -> HPolytope:
    """Hull a point set and return it with facet halfspaces attached."""
    V = hull_vertices(np.asarray(points, dtype=float))
    hull = ConvexHull(V)
    A = hull.equations[:, :-1]
    b = -hull.equations[:, -1]
    A, b = normalize_halfspaces(A, b)
    # dedup parallel duplicate rows from simplicial facets of one plane
    key = np.round(np.hstack([A, b[:, None]]) / 1e-9).astype(np.int64)
    _, keep = np.unique(key, axis=0, return_index=True)
    keep = np.sort(keep)
    p = HPolytope(A[keep], b[keep], vertices=V, normalize=False)
    return p


def make_body(spec: dict, eps: float) -> HPolytope:
    """Instantiate a body file dict at input-discretization scale eps."""
    if "dim" not in spec or "kind" not in spec:
        raise ValidationError("body spec needs 'dim' and 'kind'")
    d = int(spec["dim"])
    kind = spec["kind"]
    if kind == "hpoly":
        A = np.asarray(spec["A"], dtype=float).reshape(-1, d)
        b = np.asarray(spec["b"], dtype=float)
        return HPolytope(A, b)
    if kind == "vpoly":
        return vpoly_to_hpoly(np.asarray(spec["vertices"], dtype=float))
    if kind == "ball":
        return ball_polytope(d, float(spec.get("radius", 0.5)), eps)
    if kind == "ellipsoid":
        return ellipsoid_polytope(spec["semi_axes"], eps)
    if kind == "generator":
        name = spec.get("name")
        if name == "cube":
            return cube_polytope(d, float(spec.get("side", 1.0)))
        if name == "ball":
            return ball_polytope(d, float(spec.get("radius", 0.5)), eps)
        if name == "cylinder":
            if d != 3:
                raise ValidationError("cylinder generator is d=3 only")
            return cylinder_polytope(float(spec.get("radius", 0.5)),
                                     float(spec.get("height", 1.0)), eps)
        if name == "random-hull":
            return random_hull_polytope(d, int(spec.get("npoints", 20)),
                                        int(spec.get("seed", 0)))
        raise ValidationError(f"unknown generator '{name}'")
    raise ValidationError(f"unknown body kind '{kind}'")


def named_body(name: str, d: int, eps: float, seed: int = 0) -> HPolytope:
    """CLI shorthand for the standard test bodies."""
    name = name.lower()
    if name in ("ball", "disk"):
        return ball_polytope(d, 0.5, eps)
    if name in ("cube", "square"):
        return cube_polytope(d)
    if name == "ellipse":
        if d != 2:
            raise ValidationError("ellipse is d=2")
        return ellipsoid_polytope([0.5, 0.25], eps)
    if name == "ellipsoid":
        return ellipsoid_polytope([0.5] + [0.25] * (d - 1), eps)
    if name == "cylinder":
        if d != 3:
            raise ValidationError("cylinder is d=3")
        return cylinder_polytope(0.5, 1.0, eps)
    if name == "random-hull":
        return random_hull_polytope(d, 20, seed)
    raise ValidationError(f"unknown body name '{name}'")
