"""Classical approximation baselines: Dudley facets, Bronshteyn-Ivanov
vertices, and the uniform-grid hull.

Net constants are set per body by a doubling search on the net density
until the exactly verified error drops below the target; the search trace
is recorded in the result parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, HalfspaceIntersection

from .canonical import CanonicalBody
from .errors import GridTooLarge, ValidationError
from .geometry import (
    HPolytope,
    HullDistance,
    VPolytope,
    hull_vertices,
    normalize_halfspaces,
)
from .lattice import FaceLattice, face_lattice
from .metrics import hausdorff_inner
from .nets import direction_net

GRID_CELL_CAP = 2 ** 28
GRID_COLUMN_CAP = 4_000_000


@dataclass
class BaselineResult:
    method: str
    vertices: np.ndarray
    lattice: FaceLattice
    hausdorff: float
    params: dict = field(default_factory=dict)


def _project_net_to_boundary(k: CanonicalBody, spacing: float):
    """Dudley-sphere net points and their nearest boundary points on K."""
    d = k.dim
    net = 2.0 * direction_net(d, spacing)
    hd = HullDistance(k.body.V)
    feet = np.empty_like(net)
    normals = np.empty_like(net)
    for i, y in enumerate(net):
        _, q = hd.project(y)
        feet[i] = q
        n = y - q
        normals[i] = n / np.linalg.norm(n)
    return net, feet, normals


def dudley(k: CanonicalBody, eps: float, c_d: float = 1.0,
           max_rounds: int = 9) -> BaselineResult:
    """Outer approximation by supporting halfspaces at nearest-boundary
    points of a Dudley-sphere net; density doubles until the verified
    error is within eps."""
    if not 0.0 < eps < 1.0:
        raise ValidationError("eps must lie in (0, 1)")
    K = k.body
    hdK = HullDistance(K.V)
    trace = []
    for _ in range(max_rounds):
        spacing = c_d * math.sqrt(eps)
        _, feet, normals = _project_net_to_boundary(k, spacing)
        offs = np.einsum("ij,ij->i", normals, feet)
        # clip with a coarse circumscribed box to keep the system bounded
        d = K.dim
        A = np.vstack([normals, np.eye(d), -np.eye(d)])
        b = np.concatenate([offs, np.full(2 * d, 0.55)])
        A, b = normalize_halfspaces(A, b)
        hs = HalfspaceIntersection(np.hstack([A, -b[:, None]]), np.zeros(d))
        V = hull_vertices(hs.intersections)
        err = max(hdK.distance(v) for v in V)
        trace.append({"c_d": c_d, "facets": len(normals), "error": err})
        if err <= eps:
            vp = VPolytope(V, canonicalize=False)
            lat = face_lattice(vp)
            # uniform shrink factor that makes the outer hull inner
            hP = np.max(K.A @ V.T, axis=1)
            s = float(np.min(K.b / np.maximum(hP, 1e-300)))
            s = min(s, 1.0)
            inner_err = hausdorff_inner(K, V * s)
            return BaselineResult(
                method="dudley", vertices=V, lattice=lat, hausdorff=err,
                params={"search": trace, "outer": True,
                        "shrink_factor": s, "shrunk_hausdorff": inner_err,
                        "shrunk_total": face_lattice(VPolytope(V * s)).total})
        c_d /= 2.0
    raise ValidationError("dudley net search did not reach the target error")


def bronshteyn_ivanov(k: CanonicalBody, eps: float, c_b: float = 1.0,
                      max_rounds: int = 9) -> BaselineResult:
    """Inner approximation: hull of nearest-boundary projections of a
    Dudley-sphere net."""
    if not 0.0 < eps < 1.0:
        raise ValidationError("eps must lie in (0, 1)")
    K = k.body
    trace = []
    for _ in range(max_rounds):
        spacing = c_b * math.sqrt(eps)
        _, feet, _ = _project_net_to_boundary(k, spacing)
        vp = VPolytope(feet)
        err = hausdorff_inner(K, vp)
        trace.append({"c_b": c_b, "points": len(feet), "error": err})
        if err <= eps:
            lat = face_lattice(vp)
            return BaselineResult(method="bronshteyn-ivanov",
                                  vertices=vp.vertices, lattice=lat,
                                  hausdorff=err,
                                  params={"search": trace, "outer": False})
        c_b /= 2.0
    raise ValidationError("bronshteyn-ivanov net search did not converge")


def grid_cell_gate(d: int, eps: float, c_g: float | None = None) -> None:
    """Raise before any heavy work when the raw grid exceeds the cap."""
    if not 0.0 < eps < 1.0:
        raise ValidationError("eps must lie in (0, 1)")
    if c_g is None:
        c_g = 1.0 / math.sqrt(d)
    span = int(math.floor(0.5 / (c_g * eps))) + 1
    if (2 * span + 1) ** d > GRID_CELL_CAP:
        raise GridTooLarge(f"grid would have {(2 * span + 1) ** d} cells")


def grid_hull(k: CanonicalBody, eps: float, c_g: float | None = None) -> BaselineResult:
    """Hull of the uniform grid points inside K (spacing c_g * eps)."""
    if not 0.0 < eps < 1.0:
        raise ValidationError("eps must lie in (0, 1)")
    K = k.body
    d = K.dim
    if d not in (2, 3):
        raise ValidationError("grid baseline is d in {2, 3}")
    if c_g is None:
        c_g = 1.0 / math.sqrt(d)
    s = c_g * eps
    span = int(math.floor(0.5 / s)) + 1
    if (2 * span + 1) ** d > GRID_CELL_CAP:
        raise GridTooLarge(f"grid would have {(2*span+1)**d} cells")
    axis = np.arange(-span, span + 1) * s
    A, b = K.A, K.b
    pts = []
    if d == 2:
        # y-interval per grid column from the halfspace system
        X = axis
        ay = A[:, 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            bound = (b[None, :] - np.outer(X, A[:, 0])) / ay[None, :]
        hi = np.where(ay > 1e-12, bound, np.inf).min(axis=1)
        lo = np.where(ay < -1e-12, bound, -np.inf).max(axis=1)
        flat = np.abs(ay) <= 1e-12
        if np.any(flat):
            ok = np.all(np.outer(X, A[flat, 0]) <= b[flat][None, :] + 1e-12,
                        axis=1)
        else:
            ok = np.ones(len(X), dtype=bool)
        hi_k = np.floor(hi / s + 1e-12)
        lo_k = np.ceil(lo / s - 1e-12)
        good = ok & (hi_k >= lo_k) & np.isfinite(hi) & np.isfinite(lo)
        for xx, l_k, h_k in zip(X[good], lo_k[good], hi_k[good]):
            pts.append((xx, l_k * s))
            pts.append((xx, h_k * s))
    else:
        if (2 * span + 1) ** 2 > GRID_COLUMN_CAP:
            raise GridTooLarge("too many grid columns")
        gx, gy = np.meshgrid(axis, axis, indexing="ij")
        cols = np.column_stack([gx.ravel(), gy.ravel()])
        az = A[:, 2]
        chunk = max(1, 8_000_000 // max(1, len(A)))
        for st in range(0, len(cols), chunk):
            cc = cols[st:st + chunk]
            num = b[None, :] - cc @ A[:, :2].T
            with np.errstate(divide="ignore", invalid="ignore"):
                bound = num / az[None, :]
            hi = np.where(az[None, :] > 1e-12, bound, np.inf).min(axis=1)
            lo = np.where(az[None, :] < -1e-12, bound, -np.inf).max(axis=1)
            flat = np.abs(az) <= 1e-12
            ok = (np.all(num[:, flat] >= -1e-12, axis=1)
                  if np.any(flat) else np.ones(len(cc), dtype=bool))
            hi_k = np.floor(hi / s + 1e-12)
            lo_k = np.ceil(lo / s - 1e-12)
            good = ok & (hi_k >= lo_k) & np.isfinite(hi) & np.isfinite(lo)
            for (xx, yy), l_k, h_k in zip(cc[good], lo_k[good], hi_k[good]):
                pts.append((xx, yy, l_k * s))
                pts.append((xx, yy, h_k * s))
    if len(pts) < d + 1:
        raise ValidationError("grid too coarse: no interior points")
    vp = VPolytope(np.asarray(pts, dtype=float))
    err = hausdorff_inner(K, vp)
    lat = face_lattice(vp)
    return BaselineResult(method="grid", vertices=vp.vertices, lattice=lat,
                          hausdorff=err,
                          params={"spacing": s, "c_g": c_g,
                                  "grid_points": len(pts), "outer": False})