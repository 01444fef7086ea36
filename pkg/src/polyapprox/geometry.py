"""Convex-geometry kernel: polytope representations and exact predicates.

Bodies are bounded convex polytopes carried in both representations at once:
an H-representation (unit-normal rows ``A``, offsets ``b``) and a lazily
computed V-representation with a vertex adjacency graph. Support values,
containment tests and plane sections all run off the vertex arrays; the
linear-programming paths back the public predicates on inputs where no
vertex representation is available yet.

Numeric policy (two tolerances, both absolute at unit body scale):
``TAU_LP`` for feasibility/containment slack, ``TAU_GEO`` for vertex
dedup and coplanarity merging.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError, cKDTree

from .errors import (
    DegenerateInput,
    EmptySection,
    InfeasibleBody,
    UnboundedBody,
)

TAU_LP = 1e-9
TAU_GEO = 1e-7

# facet-merge threshold for face lattices, in radians
MERGE_ANGLE = 1e-6


def unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("zero vector has no direction")
    return v / n


class Halfspace:
    """{z : <normal, z> <= offset}; the normal is stored unit-length."""

    __slots__ = ("normal", "offset")

    def __init__(self, normal, offset: float):
        n = np.asarray(normal, dtype=float)
        nn = np.linalg.norm(n)
        if nn == 0.0:
            raise ValueError("halfspace with zero normal")
        self.normal = n / nn
        self.offset = float(offset) / nn


def normalize_halfspaces(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Scale rows of (A, b) so every normal has unit length."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    norms = np.linalg.norm(A, axis=1)
    if np.any(norms <= 0.0):
        raise ValueError("halfspace with zero normal")
    return A / norms[:, None], b / norms


class HPolytope:
    """Bounded convex polytope, H-representation first.

    ``A`` has unit rows; the set is {z : A z <= b}. Vertex data is computed
    on demand and cached. Instances are treated as immutable after
    construction.
    """

    def __init__(self, A, b, vertices=None, normalize=True):
        if normalize:
            A, b = normalize_halfspaces(A, b)
        else:
            A = np.asarray(A, dtype=float)
            b = np.asarray(b, dtype=float).ravel()
        self.A = A
        self.b = b
        self.dim = A.shape[1]
        self._V = None if vertices is None else np.asarray(vertices, dtype=float)
        self._adj_off = None
        self._adj_idx = None
        self._kdtree = None
        self._interior = None
        self._hull = None

    # -- basic queries -------------------------------------------------

    @property
    def nfacets(self) -> int:
        return self.A.shape[0]

    def slacks(self, x: np.ndarray) -> np.ndarray:
        return self.b - self.A @ x

    def boundary_distance(self, x: np.ndarray) -> float:
        """Distance from an interior point to the boundary (min facet slack)."""
        return float(np.min(self.slacks(x)))

    def contains_point(self, x, tol: float = TAU_LP) -> bool:
        return bool(np.all(self.A @ np.asarray(x, dtype=float) <= self.b + tol))

    def contains_points(self, X: np.ndarray, tol: float = TAU_LP) -> np.ndarray:
        return np.all(X @ self.A.T <= self.b + tol, axis=1)

    # -- vertex representation -----------------------------------------

    @property
    def V(self) -> np.ndarray:
        if self._V is None:
            self._compute_vertices()
        return self._V

    def has_vertices(self) -> bool:
        return self._V is not None

    def interior_point(self) -> np.ndarray:
        """Chebyshev center; raises if the system is empty or unbounded."""
        if self._interior is not None:
            return self._interior
        if self._V is not None:
            self._interior = np.mean(self._V, axis=0)
            return self._interior
        m, d = self.A.shape
        # max r  s.t.  A x + r <= b, 0 <= r <= 1
        c = np.zeros(d + 1)
        c[-1] = -1.0
        A_ub = np.hstack([self.A, np.ones((m, 1))])
        bounds = [(None, None)] * d + [(0.0, 1.0)]
        res = linprog(c, A_ub=A_ub, b_ub=self.b, bounds=bounds, method="highs")
        if res.status != 0 or res.x is None:
            raise InfeasibleBody("no interior point found")
        r = res.x[-1]
        if r <= TAU_LP:
            raise DegenerateInput("polytope has empty interior")
        self._interior = res.x[:-1]
        return self._interior

    def _check_bounded(self) -> None:
        # bounded iff the recession cone {y : A y <= 0} is {0}
        m, d = self.A.shape
        for j in range(d):
            for sign in (1.0, -1.0):
                c = np.zeros(d)
                c[j] = -sign
                res = linprog(
                    c, A_ub=self.A, b_ub=np.zeros(m),
                    bounds=[(-1.0, 1.0)] * d, method="highs",
                )
                if res.status == 0 and -res.fun > TAU_GEO:
                    raise UnboundedBody(f"unbounded in coordinate {j}")

    def _compute_vertices(self) -> None:
        x0 = None
        try:
            x0 = self.interior_point()
        except InfeasibleBody:
            raise
        self._check_bounded()
        halfspaces = np.hstack([self.A, -self.b[:, None]])
        try:
            hs = HalfspaceIntersection(halfspaces, x0)
        except QhullError as e:
            raise DegenerateInput(f"vertex enumeration failed: {e}") from e
        V = dedup_points(hs.intersections, TAU_GEO)
        if V.shape[0] < self.dim + 1:
            raise DegenerateInput("fewer than d+1 vertices")
        self._V = order_vertices(V)

    def hull(self) -> ConvexHull:
        if self._hull is None:
            self._hull = ConvexHull(self.V)
        return self._hull

    def adjacency(self) -> tuple[np.ndarray, np.ndarray]:
        """Vertex adjacency as CSR-style (offsets, flat neighbor indices)."""
        if self._adj_off is None:
            if self.dim == 2:
                n = len(self.V)
                idx = np.empty(2 * n, dtype=np.int32)
                off = np.arange(0, 2 * n + 1, 2, dtype=np.int64)
                ar = np.arange(n)
                idx[0::2] = (ar - 1) % n
                idx[1::2] = (ar + 1) % n
                self._adj_off, self._adj_idx = off, idx
            else:
                n = len(self.V)
                simplices = self.hull().simplices.astype(np.int64)
                e = np.vstack([simplices[:, [0, 1]], simplices[:, [1, 2]],
                               simplices[:, [0, 2]]])
                e.sort(axis=1)
                keys = np.unique(e[:, 0] * n + e[:, 1])
                e0, e1 = keys // n, keys % n
                both = np.concatenate([e0 * n + e1, e1 * n + e0])
                both.sort()
                src, dst = both // n, both % n
                counts = np.bincount(src, minlength=n)
                self._adj_off = np.concatenate([[0], np.cumsum(counts)])
                self._adj_idx = dst.astype(np.int32)
        return self._adj_off, self._adj_idx

    def kdtree(self) -> cKDTree:
        if self._kdtree is None:
            self._kdtree = cKDTree(self.V)
        return self._kdtree

    def set_adjacency(self, offsets: np.ndarray, flat_idx: np.ndarray) -> None:
        """Install a known vertex adjacency (generators build it directly)."""
        self._adj_off = np.asarray(offsets, dtype=np.int64)
        self._adj_idx = np.asarray(flat_idx, dtype=np.int32)

    def adjacency_matrix(self) -> np.ndarray | None:
        """(n, deg) neighbor table when all degrees agree, else None."""
        mat = getattr(self, "_adj_mat", "unset")
        if isinstance(mat, str):
            off, idx = self.adjacency()
            deg = np.diff(off)
            if len(deg) and deg.min() == deg.max():
                mat = idx.reshape(len(deg), int(deg[0]))
            else:
                mat = None
            self._adj_mat = mat
        return mat

    def scaled(self, factor: float) -> "HPolytope":
        """Uniform scaling about the origin."""
        V = None if self._V is None else self._V * factor
        p = HPolytope(self.A, self.b * factor, vertices=V, normalize=False)
        # scaled copies share the adjacency structure
        if self._adj_off is not None and V is not None:
            p._adj_off, p._adj_idx = self._adj_off, self._adj_idx
        return p


class VPolytope:
    """Convex hull of a point set; vertices are hull-canonicalized."""

    def __init__(self, points, canonicalize: bool = True):
        P = np.asarray(points, dtype=float)
        if P.ndim != 2:
            raise DegenerateInput("expected an (n, d) point array")
        if canonicalize:
            P = hull_vertices(P)
        self.vertices = P
        self.dim = P.shape[1]

    def __len__(self) -> int:
        return len(self.vertices)


def hull_vertices(P: np.ndarray) -> np.ndarray:
    """Extreme points of a point set, CCW-ordered in d=2."""
    P = np.asarray(P, dtype=float)
    n, d = P.shape
    if n < d + 1:
        raise DegenerateInput("need at least d+1 points")
    try:
        h = ConvexHull(P)
    except QhullError as e:
        raise DegenerateInput(f"degenerate point set: {e}") from e
    V = P[h.vertices]
    if d == 2:
        return V  # Qhull returns CCW order in 2D
    return V


def order_vertices(V: np.ndarray) -> np.ndarray:
    """CCW order for polygons; hull-vertex order otherwise."""
    if V.shape[1] == 2:
        c = V.mean(axis=0)
        ang = np.arctan2(V[:, 1] - c[1], V[:, 0] - c[0])
        return V[np.argsort(ang)]
    return V


def dedup_points(P: np.ndarray, tol: float) -> np.ndarray:
    """Merge points closer than tol (union-find over KD-tree pairs)."""
    P = np.asarray(P, dtype=float)
    n = len(P)
    if n <= 1:
        return P.copy()
    tree = cKDTree(P)
    pairs = tree.query_pairs(tol, output_type="ndarray")
    if len(pairs) == 0:
        return P.copy()
    parent = np.arange(n)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri
    roots = np.array([find(i) for i in range(n)])
    uniq = np.unique(roots)
    out = np.empty((len(uniq), P.shape[1]))
    for k, r in enumerate(uniq):
        out[k] = P[roots == r].mean(axis=0)
    return out


# -- support ------------------------------------------------------------


def support(body: HPolytope, u: np.ndarray) -> tuple[float, np.ndarray]:
    """Support value max <u, z> over the body and a witness attaining it."""
    u = np.asarray(u, dtype=float)
    V = body.V
    dots = V @ u
    i = int(np.argmax(dots))
    return float(dots[i]), V[i]


def support_lp(A: np.ndarray, b: np.ndarray, u: np.ndarray) -> tuple[float, np.ndarray]:
    """LP support for H-polytopes without vertex data; raises if unbounded."""
    res = linprog(-u, A_ub=A, b_ub=b, bounds=[(None, None)] * A.shape[1],
                  method="highs")
    if res.status == 3:
        raise UnboundedBody("support unbounded in this direction")
    if res.status != 0:
        raise InfeasibleBody("support LP failed")
    return float(-res.fun), res.x


def support_batch(body: HPolytope, U: np.ndarray, budget: int = 32_000_000):
    """Support values and witness indices for many directions at once.

    Large vertex sets with a uniform-degree adjacency use hill climbing on
    the vertex graph (the support argmax is the unique local maximum on a
    convex polytope, up to face plateaus) seeded by a KD-tree guess; the
    dense matmul path covers everything else.
    """
    V = body.V
    n = U.shape[0]
    if len(V) >= 4096 and n >= 1024:
        adj = body.adjacency_matrix()
        if adj is not None:
            return _support_hillclimb(body, U, adj)
    chunk = max(256, budget // max(1, len(V)))
    vals = np.empty(n)
    idx = np.empty(n, dtype=np.int64)
    for s in range(0, n, chunk):
        e = min(n, s + chunk)
        D = U[s:e] @ V.T
        ii = np.argmax(D, axis=1)
        idx[s:e] = ii
        vals[s:e] = D[np.arange(e - s), ii]
        del D
    return vals, idx


def _support_hillclimb(body: HPolytope, U: np.ndarray, adj: np.ndarray):
    V = body.V
    n = len(U)
    rad = float(np.max(np.sqrt(np.einsum("ij,ij->i", V, V))))
    _, cur = body.kdtree().query(rad * U)
    cur = cur.astype(np.int64)
    vals = np.einsum("ij,ij->i", V[cur], U)
    active = np.arange(n)
    for _ in range(512):
        nb = adj[cur[active]]                     # (m, deg)
        cand = np.einsum("mkj,mj->mk", V[nb], U[active])
        best = np.argmax(cand, axis=1)
        bv = cand[np.arange(len(active)), best]
        improve = bv > vals[active] + 1e-15
        if not np.any(improve):
            break
        upd = active[improve]
        cur[upd] = nb[improve, best[improve]]
        vals[upd] = bv[improve]
        active = upd
    return vals, cur


# -- predicates ----------------------------------------------------------


def intersects(a: HPolytope, b: HPolytope, tol: float = TAU_LP) -> bool:
    """Closed-set intersection of two bounded H-polytopes.

    Decided by the feasibility LP  min s  s.t.  A x - s <= b  over the
    stacked system; touching boundaries count as intersecting.
    """
    A = np.vstack([a.A, b.A])
    rhs = np.concatenate([a.b, b.b])
    m, d = A.shape
    c = np.zeros(d + 1)
    c[-1] = 1.0
    A_ub = np.hstack([A, -np.ones((m, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=rhs,
                  bounds=[(None, None)] * d + [(-1.0, None)], method="highs")
    if res.status != 0:
        raise InfeasibleBody("intersection LP failed")
    return bool(res.x[-1] <= tol)


def contains(outer: HPolytope, inner: HPolytope, tol: float = TAU_LP) -> bool:
    """True iff support(inner, u) <= b + tol for every outer facet (u, b)."""
    Vin = inner.V
    sup = np.max(outer.A @ Vin.T, axis=1)
    return bool(np.all(sup <= outer.b + tol))


def contains_vrep(A: np.ndarray, b: np.ndarray, V: np.ndarray,
                  tol: float = TAU_LP) -> bool:
    """Vertex-set containment in a raw halfspace system."""
    return bool(np.all(V @ A.T <= b[None, :] + tol))


# -- plane sections ------------------------------------------------------


def _stamp_arrays(body: HPolytope) -> tuple[np.ndarray, int]:
    """Reusable visited-marker array; a fresh stamp value per traversal."""
    n = len(body.V)
    marks = getattr(body, "_marks", None)
    if marks is None or len(marks) != n:
        marks = np.zeros(n, dtype=np.int64)
        body._marks = marks
        body._stamp = 0
    body._stamp += 1
    return marks, body._stamp


# BFS level cap before switching to a full vertex scan (wide flat caps make
# ring-shaped hull graphs with large diameter)
_BFS_MAX_LEVELS = 24


def cap_vertex_set(body: HPolytope, u: np.ndarray, c: float,
                   witness_idx: int | None = None) -> np.ndarray:
    """Indices of vertices with <u, v> > c.

    Level-synchronous BFS from the support witness: the vertex set above a
    hyperplane is connected on the hull graph of a convex polytope, so only
    the cap's neighborhood is ever touched. Small bodies use a direct scan.
    """
    V = body.V
    if len(V) <= 64:
        return np.nonzero(V @ u > c)[0].astype(np.int64)
    if witness_idx is None:
        witness_idx = int(np.argmax(V @ u))
    if float(V[witness_idx] @ u) <= c:
        return np.empty(0, dtype=np.int64)
    adj_mat = body.adjacency_matrix()
    if adj_mat is not None and len(V) > 4096:
        # KD-seeded scan with an exact closure certificate: if every
        # neighbor of the found set is below the plane, the set is the
        # whole connected cap component
        apex = V[witness_idx]
        depth = float(apex @ u) - c
        rq = 1.6 * math.sqrt(max(depth, 1e-300)) + 2.0 * depth
        cand = np.asarray(body.kdtree().query_ball_point(apex, rq),
                          dtype=np.int64)
        if len(cand):
            found = cand[V[cand] @ u > c]
            if len(found):
                marks, stamp = _stamp_arrays(body)
                marks[found] = stamp
                nbrs = adj_mat[found].ravel()
                outside = nbrs[marks[nbrs] != stamp]
                if len(outside) == 0 or float(np.max(V[outside] @ u)) <= c:
                    return found
    off, idx = body.adjacency()
    marks, stamp = _stamp_arrays(body)
    marks[witness_idx] = stamp
    inside = [np.array([witness_idx], dtype=np.int64)]
    frontier = inside[0]
    for level in range(_BFS_MAX_LEVELS):
        if len(frontier) == 0:
            break
        if adj_mat is not None:
            nbrs = adj_mat[frontier].ravel()
        else:
            nbrs = np.concatenate([idx[off[i]:off[i + 1]] for i in frontier])
        nbrs = np.unique(nbrs)
        new = nbrs[marks[nbrs] != stamp]
        if len(new) == 0:
            break
        marks[new] = stamp
        grow = new[V[new] @ u > c]
        if len(grow):
            inside.append(grow)
        frontier = grow
    else:
        # wide cap: one vectorized scan is cheaper than a long BFS
        return np.where(V @ u > c)[0].astype(np.int64)
    return np.concatenate(inside)


def section_ring(body: HPolytope, u: np.ndarray, c: float,
                 inside_idx: np.ndarray | None = None) -> np.ndarray:
    """Vertices of the section polytope body ∩ {<u, z> = c}.

    d=2: the two chord endpoints. d=3: the section polygon's vertices,
    ordered by angle about u. The plane must cut the interior.
    """
    V = body.V
    d = body.dim
    if inside_idx is None:
        inside_idx = cap_vertex_set(body, u, c)
    if len(inside_idx) == 0:
        raise EmptySection("plane does not cut the body interior")
    if len(V) <= 64:
        pairs = getattr(body, "_edge_pairs", None)
        if pairs is None:
            off, idx = body.adjacency()
            e0 = np.repeat(np.arange(len(V)), np.diff(off))
            e1 = idx.astype(np.int64)
            keep = e0 < e1
            pairs = np.column_stack([e0[keep], e1[keep]])
            body._edge_pairs = pairs
        dots_all = V @ u
        above = dots_all > c
        cross = above[pairs[:, 0]] != above[pairs[:, 1]]
        src = np.where(above[pairs[cross, 0]], pairs[cross, 0], pairs[cross, 1])
        dst = np.where(above[pairs[cross, 0]], pairs[cross, 1], pairs[cross, 0])
    else:
        adj_mat = body.adjacency_matrix()
        if adj_mat is not None:
            deg = adj_mat.shape[1]
            src = np.repeat(inside_idx, deg)
            dst = adj_mat[inside_idx].ravel().astype(np.int64)
        else:
            off, idx = body.adjacency()
            src = np.repeat(inside_idx,
                            (off[inside_idx + 1] - off[inside_idx]).astype(np.int64))
            dst = np.concatenate(
                [idx[off[i]:off[i + 1]] for i in inside_idx]).astype(np.int64)
        marks, stamp = _stamp_arrays(body)
        marks[inside_idx] = stamp
        out_mask = marks[dst] != stamp
        src, dst = src[out_mask], dst[out_mask]
    if len(src) == 0:
        raise EmptySection("tangent section")
    ds = V[src] @ u
    dd = V[dst] @ u
    t = (c - ds) / (dd - ds)
    P = V[src] + t[:, None] * (V[dst] - V[src])
    if d == 2:
        if len(P) < 2:
            raise EmptySection("tangent section")
        if len(P) > 2:
            t1 = _plane_basis(u)[0]
            proj = P @ t1
            P = P[[int(np.argmin(proj)), int(np.argmax(proj))]]
        return P
    if len(P) < 3:
        raise EmptySection("tangent or degenerate section")
    t1, t2 = _plane_basis(u)
    center = P.mean(axis=0)
    ang = np.arctan2((P - center) @ t2, (P - center) @ t1)
    P = P[np.argsort(ang)]
    # collapse numerically duplicate ring points
    gap = np.linalg.norm(np.diff(P, axis=0), axis=1)
    keep = np.concatenate([[True], gap > 1e-13])
    P = P[keep]
    if len(P) >= 2 and np.linalg.norm(P[-1] - P[0]) <= 1e-13:
        P = P[:-1]
    return P


def _cross3(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.array([a[1] * b[2] - a[2] * b[1],
                     a[2] * b[0] - a[0] * b[2],
                     a[0] * b[1] - a[1] * b[0]])


def _plane_basis(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    u = np.asarray(u, dtype=float)
    if len(u) == 2:
        t1 = np.array([-u[1], u[0]])
        return t1, t1
    k = int(np.argmin(np.abs(u)))
    e = np.zeros(3)
    e[k] = 1.0
    t1 = _cross3(u, e)
    t1 /= np.sqrt(t1 @ t1)
    t2 = _cross3(u, t1)
    return t1, t2


def polygon_centroid_3d(P: np.ndarray) -> np.ndarray:
    """Area centroid of a planar convex polygon given in cyclic order."""
    if len(P) == 2:
        return 0.5 * (P[0] + P[1])
    a = P[1:-1] - P[0]
    b = P[2:] - P[0]
    cx = a[:, 1] * b[:, 2] - a[:, 2] * b[:, 1]
    cy = a[:, 2] * b[:, 0] - a[:, 0] * b[:, 2]
    cz = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    areas = 0.5 * np.sqrt(cx * cx + cy * cy + cz * cz)
    total = float(areas.sum())
    if total <= 0.0:
        # degenerate sliver: fall back to the vertex mean
        return P.mean(axis=0)
    tri_cent = (P[0][None, :] + P[1:-1] + P[2:]) / 3.0
    return (areas[:, None] * tri_cent).sum(axis=0) / total


def section_centroid(body: HPolytope, u: np.ndarray, c: float,
                     inside_idx: np.ndarray | None = None) -> np.ndarray:
    """Centroid of the (d-1)-dimensional section body ∩ {<u,z> = c}."""
    ring = section_ring(body, u, c, inside_idx=inside_idx)
    if body.dim == 2:
        return 0.5 * (ring[0] + ring[1])
    return polygon_centroid_3d(ring)


def symmetrized_section(x: np.ndarray, ring: np.ndarray,
                        u: np.ndarray) -> np.ndarray:
    """Inner vertices of S ∩ (2x - S) for the section polygon S through x.

    A certified inner approximation of the Macbeath region's slice in the
    section plane: along each ring direction w the symmetrized body
    reaches at least min(radius(w), apothem of the opposite sector), so
    the returned symmetric point pairs all lie inside S ∩ (2x - S).
    """
    d = len(x)
    if d == 2:
        # ring is the chord pair; intersect the chord with its reflection
        a, b = ring[0] - x, ring[1] - x
        dirv = b - a
        L2 = float(dirv @ dirv)
        if L2 <= 0.0:
            return x[None, :]
        ta = float(-a @ dirv) / L2     # parameter of x's projection
        lo = max(0.0, 2 * ta - 1.0)
        hi = min(1.0, 2 * ta)
        if lo > hi:
            return x[None, :]
        return np.vstack([x + a + lo * dirv, x + a + hi * dirv])
    t1, t2 = _plane_basis(u)
    rel = ring - x[None, :]
    px = rel @ t1
    py = rel @ t2
    r = np.sqrt(px * px + py * py)
    if np.any(r <= 0.0):
        keep = r > 0.0
        px, py, r = px[keep], py[keep], r[keep]
        if len(r) < 3:
            return x[None, :]
    ang = np.arctan2(py, px)
    order = np.argsort(ang)
    px, py, r, ang = px[order], py[order], r[order], ang[order]
    n = len(r)
    # apothem of each boundary edge (distance from x to the chord line)
    nxt = np.arange(1, n + 1)
    nxt[-1] = 0
    qx, qy = px[nxt], py[nxt]
    cross = np.abs(px * qy - py * qx)
    elen = np.sqrt((qx - px) ** 2 + (qy - py) ** 2)
    apoth = np.where(elen > 1e-300, cross / np.maximum(elen, 1e-300),
                     np.minimum(r, r[nxt]))
    # sector of the opposite direction for every vertex angle
    opp = np.mod(ang + np.pi + np.pi, 2 * np.pi) - np.pi
    j = np.searchsorted(ang, opp)
    edge = (j - 1) % n
    rho = np.minimum(r, apoth[edge])
    ux = px / r
    uy = py / r
    pts2 = np.concatenate([np.column_stack([rho * ux, rho * uy]),
                           np.column_stack([-rho * ux, -rho * uy])])
    return x[None, :] + pts2[:, 0:1] * t1[None, :] + pts2[:, 1:2] * t2[None, :]


# -- volumes -------------------------------------------------------------


def polygon_area(V: np.ndarray) -> float:
    x, y = V[:, 0], V[:, 1]
    return 0.5 * abs(float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)))


def volume_of_vertices(V: np.ndarray) -> float:
    """Volume of the convex hull of a point set (exact for d<=3)."""
    V = np.asarray(V, dtype=float)
    d = V.shape[1]
    if len(V) < d + 1:
        return 0.0
    if d == 2:
        return polygon_area(order_vertices(hull_vertices(V)))
    try:
        return float(ConvexHull(V).volume)
    except QhullError:
        return 0.0


def volume(p: HPolytope) -> float:
    return volume_of_vertices(p.V)


# -- local vertex enumeration for small regions ---------------------------


def region_vertices(A: np.ndarray, b: np.ndarray, x0: np.ndarray,
                    inball: float) -> np.ndarray:
    """Vertices of {A z <= b} around the strictly interior point ``x0``.

    The system is solved in a shifted/anisotropically scaled frame so
    Qhull sees a well-conditioned body even for regions whose extents
    span several orders of magnitude.
    """
    d = A.shape[1]
    s = b - A @ x0
    if np.min(s) <= 0.0:
        raise InfeasibleBody("reference point not strictly interior")
    # per-axis ray radii of the shifted region, as conditioning scales
    scales = np.empty(d)
    for j in range(d):
        col = A[:, j]
        lo = s[col > TAU_GEO] / col[col > TAU_GEO]
        hi = s[col < -TAU_GEO] / (-col[col < -TAU_GEO])
        r = min(lo.min() if len(lo) else np.inf, hi.min() if len(hi) else np.inf)
        scales[j] = r if np.isfinite(r) and r > 0 else 1.0
    As = A * scales[None, :]
    norms = np.sqrt(np.einsum("ij,ij->i", As, As))
    As /= norms[:, None]
    bs = s / norms
    halfspaces = np.hstack([As, -bs[:, None]])
    try:
        hs = HalfspaceIntersection(halfspaces, np.zeros(d))
    except QhullError:
        # joggle as a last resort; callers treat results as geometry, the
        # perturbation is far below all tolerances that matter at this scale
        hs = HalfspaceIntersection(halfspaces, np.zeros(d), qhull_options="QJ1e-12")
    W = hs.intersections
    if not np.all(np.isfinite(W)) or float(np.max(np.abs(W))) > 1e9:
        # an unbounded local system must widen its row set, not truncate
        raise UnboundedBody("local halfspace system is unbounded")
    # cheap rounded-key dedup in the conditioned frame (coordinates are O(1)
    # there); duplicates come from adjacent simplicial dual facets
    key = np.round(W * 1e10).astype(np.int64)
    _, keep = np.unique(key, axis=0, return_index=True)
    if len(keep) < len(W):
        W = W[keep]
    return W * scales[None, :] + x0


# -- GJK distance between convex hulls of point sets ----------------------


SEPARATED = 1
INTERSECT = 0
UNKNOWN = -1


def gjk_classify(P: np.ndarray, Q: np.ndarray, tau: float,
                 max_iter: int = 48) -> int:
    """Certified relation of conv(P) and conv(Q) at gap tau.

    The running support gap along the current direction is a distance
    lower bound (separation certificate); simplex collapse onto the origin
    certifies intersection. Stalls and iteration caps return UNKNOWN.
    """
    p0 = P.mean(axis=0)
    q0 = Q.mean(axis=0)
    v = p0 - q0
    nv2 = float(v @ v)
    scale = max(1.0, math.sqrt(abs(float(p0 @ p0))),
                math.sqrt(abs(float(q0 @ q0))))
    zero2 = max(tau, 1e-13 * scale) ** 2
    if nv2 <= zero2:
        return INTERSECT
    S: list[np.ndarray] = []
    last = math.inf
    for _ in range(max_iter):
        ip = int(np.argmin(P @ v))
        iq = int(np.argmax(Q @ v))
        w = P[ip] - Q[iq]
        nv = math.sqrt(nv2)
        gap = float(v @ w) / nv
        if gap > tau:
            return SEPARATED
        if nv2 - float(v @ w) <= 1e-12 * max(nv, 1e-12):
            # converged: nv is the true distance
            return SEPARATED if nv > tau else INTERSECT
        S.append(w)
        res = _closest_simplex(S)
        if res is None:
            return UNKNOWN
        d2, cand, pts = res
        if d2 <= zero2:
            return INTERSECT
        if d2 >= last * (1.0 - 1e-12):
            return UNKNOWN
        last = d2
        S = pts
        if len(S) > P.shape[1] + 1:
            S = S[-(P.shape[1] + 1):]
        v = cand
        nv2 = d2
    return UNKNOWN


def gjk_separated(P: np.ndarray, Q: np.ndarray, tau: float,
                  max_iter: int = 48) -> bool:
    """True iff separation beyond tau is certified (unknown counts False)."""
    return gjk_classify(P, Q, tau, max_iter=max_iter) == SEPARATED


def _solve_small(G, rhs):
    """Solve G t = rhs for 1x1..3x3 SPD systems with direct formulas."""
    k = len(rhs)
    if k == 1:
        g = G[0][0]
        if abs(g) < 1e-300:
            return None
        return [rhs[0] / g]
    if k == 2:
        a, b = G[0]
        c, d = G[1]
        det = a * d - b * c
        if abs(det) < 1e-300:
            return None
        return [(rhs[0] * d - b * rhs[1]) / det,
                (a * rhs[1] - rhs[0] * c) / det]
    a, b, c = G[0]
    d, e, f = G[1]
    g, h, i = G[2]
    det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    if abs(det) < 1e-300:
        return None
    x, y, z = rhs
    t0 = (x * (e * i - f * h) - b * (y * i - f * z) + c * (y * h - e * z)) / det
    t1 = (a * (y * i - f * z) - x * (d * i - f * g) + c * (d * z - y * g)) / det
    t2 = (a * (e * z - y * h) - b * (d * z - y * g) + x * (d * h - e * g)) / det
    return [t0, t1, t2]


def _closest_simplex(S: list[np.ndarray]):
    """Closest point to the origin on the simplex conv(S), with the
    minimal supporting sub-simplex.

    Only sub-simplices containing the newest point are scanned (the
    classic GJK reduction); if none yields a valid barycentric solution
    the scan falls back to all subsets.
    """
    n = len(S)
    newest_bit = 1 << (n - 1)
    best = _scan_subsets(S, n, newest_bit)
    if best is None:
        best = _scan_subsets(S, n, 0)
    return best


def _scan_subsets(S, n, required_bit):
    best = None
    for mask in range(1, 1 << n):
        if required_bit and not mask & required_bit:
            continue
        pts = [S[i] for i in range(n) if mask >> i & 1]
        k = len(pts)
        base = pts[0]
        if k > len(base) + 1:
            continue
        if k == 1:
            cand = base
        else:
            D = [p - base for p in pts[1:]]
            G = [[float(a @ b) for b in D] for a in D]
            rhs = [-float(a @ base) for a in D]
            t = _solve_small(G, rhs)
            if t is None:
                continue
            ssum = sum(t)
            if any(ti < -1e-12 for ti in t) or ssum > 1.0 + 1e-12:
                continue
            cand = base.copy()
            for ti, Di in zip(t, D):
                cand += ti * Di
        d2 = float(cand @ cand)
        if best is None or d2 < best[0] - 1e-18:
            best = (d2, cand, pts)
    return best


def gjk_distance(P: np.ndarray, Q: np.ndarray, tol: float = 1e-12,
                 max_iter: int = 200) -> float:
    """Euclidean distance between conv(P) and conv(Q); 0 if they intersect."""
    scale = max(1.0, float(np.max(np.abs(P))), float(np.max(np.abs(Q))))
    p0 = P.mean(axis=0)
    q0 = Q.mean(axis=0)
    v = p0 - q0
    if np.linalg.norm(v) < tol * scale:
        return 0.0
    S: list[np.ndarray] = []
    for _ in range(max_iter):
        ip = int(np.argmin(P @ v))
        iq = int(np.argmax(Q @ v))
        w = P[ip] - Q[iq]
        # termination: support gap below tolerance
        if float(v @ v) - float(v @ w) <= tol * scale * max(np.linalg.norm(v), 1e-300):
            return float(np.linalg.norm(v))
        S.append(w)
        res = _closest_simplex(S)
        if res is None:
            return float(np.linalg.norm(v))
        d2, cand, pts = res
        if d2 <= (tol * scale) ** 2:
            return 0.0
        S = pts
        if len(S) > P.shape[1] + 1:
            S = S[-(P.shape[1] + 1):]
        v = cand
    return float(np.linalg.norm(v))


def convex_sets_disjoint(VA: np.ndarray, VB: np.ndarray, tau: float = TAU_LP,
                         probe_dirs=(), max_iter: int = 48) -> bool:
    """True iff conv(VA) and conv(VB) are separated by more than tau.

    Cheap separating-direction certificates run first (center line plus any
    caller-supplied probes); GJK decides the remaining cases.
    """
    ca = VA.mean(axis=0)
    cb = VB.mean(axis=0)
    v = cb - ca
    nv = float(np.sqrt(v @ v))
    if nv > 1e-300:
        v = v / nv
        if float(np.min(VB @ v)) - float(np.max(VA @ v)) > tau:
            return True
    for p in probe_dirs:
        if float(np.min(VB @ p)) - float(np.max(VA @ p)) > tau:
            return True
        if float(np.min(VA @ p)) - float(np.max(VB @ p)) > tau:
            return True
    return gjk_separated(VA, VB, tau, max_iter=max_iter)


# -- point-to-hull distance ------------------------------------------------


def _seg_closest(p, a, b):
    ab = b - a
    t = float((p - a) @ ab) / max(float(ab @ ab), 1e-300)
    t = min(1.0, max(0.0, t))
    q = a + t * ab
    return float(np.linalg.norm(p - q)), q


def _tri_closest(p, a, b, c):
    """Closest point on triangle abc to p (Ericson's region walk)."""
    ab, ac, ap = b - a, c - a, p - a
    d1, d2 = float(ab @ ap), float(ac @ ap)
    if d1 <= 0 and d2 <= 0:
        return float(np.linalg.norm(ap)), a
    bp = p - b
    d3, d4 = float(ab @ bp), float(ac @ bp)
    if d3 >= 0 and d4 <= d3:
        return float(np.linalg.norm(bp)), b
    vc = d1 * d4 - d3 * d2
    if vc <= 0 and d1 >= 0 and d3 <= 0:
        t = d1 / (d1 - d3)
        q = a + t * ab
        return float(np.linalg.norm(p - q)), q
    cp = p - c
    d5, d6 = float(ab @ cp), float(ac @ cp)
    if d6 >= 0 and d5 <= d6:
        return float(np.linalg.norm(cp)), c
    vb = d5 * d2 - d1 * d6
    if vb <= 0 and d2 >= 0 and d6 <= 0:
        t = d2 / (d2 - d6)
        q = a + t * ac
        return float(np.linalg.norm(p - q)), q
    va = d3 * d6 - d5 * d4
    if va <= 0 and (d4 - d3) >= 0 and (d5 - d6) >= 0:
        t = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        q = b + t * (c - b)
        return float(np.linalg.norm(p - q)), q
    denom = 1.0 / (va + vb + vc)
    v = vb * denom
    w = vc * denom
    q = a + ab * v + ac * w
    return float(np.linalg.norm(p - q)), q


def _tri_closest_batch(p: np.ndarray, A: np.ndarray, B: np.ndarray,
                       C: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized closest points on triangles (rows of A, B, C) to p."""
    ab = B - A
    ac = C - A
    ap = p[None, :] - A
    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)
    bp = p[None, :] - B
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)
    cp = p[None, :] - C
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)
    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4
    out = np.empty_like(A)
    # interior by default
    denom = va + vb + vc
    denom = np.where(np.abs(denom) < 1e-300, 1.0, denom)
    v = vb / denom
    w = vc / denom
    out[:] = A + ab * v[:, None] + ac * w[:, None]
    # edge BC
    t = (d4 - d3) / np.where(np.abs((d4 - d3) + (d5 - d6)) < 1e-300, 1.0,
                             (d4 - d3) + (d5 - d6))
    m = (va <= 0) & ((d4 - d3) >= 0) & ((d5 - d6) >= 0)
    out[m] = B[m] + np.clip(t[m], 0, 1)[:, None] * (C[m] - B[m])
    # edge AC
    t = d2 / np.where(np.abs(d2 - d6) < 1e-300, 1.0, d2 - d6)
    m = (vb <= 0) & (d2 >= 0) & (d6 <= 0)
    out[m] = A[m] + np.clip(t[m], 0, 1)[:, None] * ac[m]
    # edge AB
    t = d1 / np.where(np.abs(d1 - d3) < 1e-300, 1.0, d1 - d3)
    m = (vc <= 0) & (d1 >= 0) & (d3 <= 0)
    out[m] = A[m] + np.clip(t[m], 0, 1)[:, None] * ab[m]
    # corners
    m = (d6 >= 0) & (d5 <= d6)
    out[m] = C[m]
    m = (d3 >= 0) & (d4 <= d3)
    out[m] = B[m]
    m = (d1 <= 0) & (d2 <= 0)
    out[m] = A[m]
    rel = out - p[None, :]
    return np.sqrt(np.einsum("ij,ij->i", rel, rel)), out


class HullDistance:
    """Certified point-to-convex-hull distance queries against a fixed hull.

    Strategy: nearest-vertex radius bounds the answer; every face carrying
    the true nearest point has all its vertices within that radius plus the
    maximum face diameter, so scanning faces incident to the vertices in the
    enlarged ball is exact.
    """

    def __init__(self, points: np.ndarray):
        self.P = np.asarray(points, dtype=float)
        self.d = self.P.shape[1]
        self.hull = ConvexHull(self.P)
        self.tree = cKDTree(self.P)
        if self.d == 3:
            simp = self.hull.simplices
            e1 = np.linalg.norm(self.P[simp[:, 0]] - self.P[simp[:, 1]], axis=1)
            e2 = np.linalg.norm(self.P[simp[:, 1]] - self.P[simp[:, 2]], axis=1)
            e3 = np.linalg.norm(self.P[simp[:, 0]] - self.P[simp[:, 2]], axis=1)
            self.max_diam = float(np.max(np.maximum(e1, np.maximum(e2, e3))))
            self.incident: list[list[int]] = [[] for _ in range(len(self.P))]
            for fi, tri in enumerate(simp):
                for vi in tri:
                    self.incident[vi].append(fi)
        else:
            hv = self.hull.vertices  # CCW order
            self.ring = self.P[hv]
            seg = np.roll(self.ring, -1, axis=0) - self.ring
            self.max_diam = float(np.max(np.linalg.norm(seg, axis=1)))
            self.ring_tree = cKDTree(self.ring)

    def distance(self, x: np.ndarray) -> float:
        """Distance from x to the hull boundary faces (0 only on the boundary;
        callers handle interior points)."""
        return self.project(x)[0]

    def project(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        """Distance to the hull boundary and the nearest boundary point."""
        x = np.asarray(x, dtype=float)
        best = np.inf
        best_pt = None
        if self.d == 2:
            r0, _ = self.ring_tree.query(x)
            cand = self.ring_tree.query_ball_point(x, r0 + self.max_diam + 1e-12)
            n = len(self.ring)
            for i in cand:
                for j in (i, (i - 1) % n):
                    a, b = self.ring[j], self.ring[(j + 1) % n]
                    dist, pt = _seg_closest(x, a, b)
                    if dist < best:
                        best, best_pt = dist, pt
            return best, best_pt
        r0, _ = self.tree.query(x)
        cand = self.tree.query_ball_point(x, r0 + self.max_diam + 1e-12)
        faces = set()
        for vi in cand:
            faces.update(self.incident[vi])
        simp = self.hull.simplices[sorted(faces)]
        dists, pts = _tri_closest_batch(x, self.P[simp[:, 0]],
                                        self.P[simp[:, 1]], self.P[simp[:, 2]])
        i = int(np.argmin(dists))
        return float(dists[i]), pts[i]

    def distance_many(self, X: np.ndarray) -> np.ndarray:
        """Boundary distances for many query points."""
        X = np.asarray(X, dtype=float)
        out = np.empty(len(X))
        r0s, _ = self.tree.query(X)
        if self.d == 2:
            for i, x in enumerate(X):
                out[i] = self.project(x)[0]
            return out
        cands = self.tree.query_ball_point(X, r0s + self.max_diam + 1e-12)
        simp_all = self.hull.simplices
        for i, x in enumerate(X):
            faces = set()
            for vi in cands[i]:
                faces.update(self.incident[vi])
            simp = simp_all[sorted(faces)]
            dists, _ = _tri_closest_batch(x, self.P[simp[:, 0]],
                                          self.P[simp[:, 1]],
                                          self.P[simp[:, 2]])
            out[i] = float(np.min(dists))
        return out

    def inside(self, x: np.ndarray, tol: float = TAU_LP) -> bool:
        eq = self.hull.equations
        return bool(np.all(eq[:, :-1] @ x + eq[:, -1] <= tol))
