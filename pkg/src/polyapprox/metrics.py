"""Exact measurement: Hausdorff error, boundary distances, complexity.

hausdorff_inner is exact for nested convex bodies: the one-sided Hausdorff
distance from an outer convex body to an inner one is attained at a vertex
of the outer body, so the maximum of exact point-to-hull distances over
the outer vertex set is the answer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .canonical import CanonicalBody
from .errors import NotNested, PointOutsideBody, ValidationError
from .geometry import TAU_LP, HPolytope, HullDistance, VPolytope
from .lattice import FaceLattice


@dataclass
class ComplexityReport:
    f_vector: tuple
    total: int
    params: dict


def complexity(lattice: FaceLattice, params: dict | None = None) -> ComplexityReport:
    return ComplexityReport(f_vector=lattice.f_vector,
                            total=lattice.total, params=params or {})


def dist_point_polytope(p: np.ndarray, q: VPolytope | np.ndarray,
                        hd: HullDistance | None = None) -> float:
    """Euclidean distance from a point to a convex hull (0 inside)."""
    pts = q.vertices if isinstance(q, VPolytope) else np.asarray(q)
    if hd is None:
        hd = HullDistance(pts)
    p = np.asarray(p, dtype=float)
    if hd.inside(p):
        return 0.0
    return hd.distance(p)


def hausdorff_inner(k: HPolytope | CanonicalBody, p: VPolytope | np.ndarray,
                    require_nested: bool = True) -> float:
    """Exact Hausdorff distance for p ⊆ k (error if not nested)."""
    body = k.body if isinstance(k, CanonicalBody) else k
    pts = p.vertices if isinstance(p, VPolytope) else np.asarray(p)
    if require_nested:
        sup = np.max(body.A @ pts.T, axis=1)
        if not np.all(sup <= body.b + 1e-7):
            raise NotNested("polytope is not inside the body")
    hd = HullDistance(pts)
    return float(np.max(hd.distance_many(body.V)))


def hausdorff_sampled(a: HPolytope, b: HPolytope, ndirs: int = 2000,
                      seed: int = 0) -> float:
    """Direction-sampled Hausdorff bound for non-nested pairs (approximate,
    flagged by name)."""
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((ndirs, a.dim))
    U /= np.linalg.norm(U, axis=1)[:, None]
    ha = np.max(U @ a.V.T, axis=1)
    hb = np.max(U @ b.V.T, axis=1)
    return float(np.max(np.abs(ha - hb)))


def delta_and_ray(k: CanonicalBody | HPolytope, x: np.ndarray):
    """Boundary distance delta(x) and ray(x) along the ray O -> x.

    delta is the minimum facet slack (unit normals); ray solves the first
    facet crossing along x's direction. At the center the ray direction is
    undefined and ray(O) := delta(O) by convention.
    """
    body = k.body if isinstance(k, CanonicalBody) else k
    x = np.asarray(x, dtype=float)
    s = body.b - body.A @ x
    if np.min(s) < -TAU_LP:
        raise PointOutsideBody("point lies outside the body")
    delta = float(max(np.min(s), 0.0))
    nx = float(np.linalg.norm(x))
    if nx < 1e-12:
        return delta, delta
    v = x / nx
    den = body.A @ v
    pos = den > 1e-14
    if not np.any(pos):
        raise ValidationError("body unbounded along the ray")
    ray = float(np.min(s[pos] / den[pos]))
    return delta, ray