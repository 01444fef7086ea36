"""Face lattices of convex polytopes (exact for d in {2, 3}).

Near-coplanar simplicial facets are merged (normal angle within 1e-6 rad,
plane offset within TAU_GEO) before faces are counted, so lattice hulls
and cap covers with many coplanar points get their true combinatorics:
vertices are points where at least three merged facets meet, and two
merged facets share at most one edge on a convex polytope.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull

from .errors import DegenerateInput
from .geometry import MERGE_ANGLE, TAU_GEO, VPolytope


@dataclass
class FaceLattice:
    dim: int
    faces: list[list[tuple]]          # per k = 0..d-1: vertex-index tuples
    incidence: list[list[list[int]]]  # per k < d-1: k-face -> (k+1)-face ids
    f_vector: tuple
    euler_ok: bool
    vertex_points: np.ndarray = None  # coordinates of the true vertices

    @property
    def total(self) -> int:
        return int(sum(self.f_vector))


def _euler_holds(f_vector, d: int) -> bool:
    alt = sum((-1) ** k * f for k, f in enumerate(f_vector))
    return alt == 1 - (-1) ** d


def face_lattice(v: VPolytope) -> FaceLattice:
    P = v.vertices
    n, d = P.shape
    if n < d + 1:
        raise DegenerateInput("need at least d+1 points")
    if d == 2:
        # VPolytope stores CCW hull order
        verts = [(i,) for i in range(n)]
        edges = [(i, (i + 1) % n) for i in range(n)]
        incidence = [[[i, (i - 1) % n] for i in range(n)]]
        fv = (n, n)
        return FaceLattice(dim=2, faces=[verts, edges], incidence=incidence,
                           f_vector=fv, euler_ok=_euler_holds(fv, 2),
                           vertex_points=P)
    if d != 3:
        raise DegenerateInput("exact face lattices are d in {2, 3}")

    hull = ConvexHull(P)
    simp = hull.simplices
    eq = hull.equations
    nf = len(simp)

    # union-find merge of coplanar neighbor facets
    parent = np.arange(nf)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    cos_tol = np.cos(MERGE_ANGLE)
    for fi in range(nf):
        for gj in hull.neighbors[fi]:
            if gj < fi:
                continue
            if eq[fi, :3] @ eq[gj, :3] >= cos_tol and \
               abs(eq[fi, 3] - eq[gj, 3]) <= TAU_GEO:
                ri, rj = find(fi), find(int(gj))
                if ri != rj:
                    parent[rj] = ri
    roots = np.array([find(i) for i in range(nf)])
    _, merged_id = np.unique(roots, return_inverse=True)
    n_facets = int(merged_id.max()) + 1

    # merged facets incident to each hull vertex
    incident_sets: dict[int, set[int]] = {}
    for fi, tri in enumerate(simp):
        m = int(merged_id[fi])
        for p in tri:
            incident_sets.setdefault(int(p), set()).add(m)

    true_vertex = {p for p, s in incident_sets.items() if len(s) >= 3}
    vert_list = sorted(true_vertex)
    vert_pos = {p: i for i, p in enumerate(vert_list)}

    # edges = merged-facet pairs sharing a triangle edge
    pair_points: dict[tuple[int, int], set[int]] = {}
    for fi in range(nf):
        mf = int(merged_id[fi])
        tri = simp[fi]
        for ei, gj in enumerate(hull.neighbors[fi]):
            mg = int(merged_id[int(gj)])
            if mg == mf:
                continue
            pair = (mf, mg) if mf < mg else (mg, mf)
            # qhull convention: neighbor ei is opposite vertex ei
            shared = [int(tri[t]) for t in range(3) if t != ei]
            pair_points.setdefault(pair, set()).update(shared)

    edge_faces = []
    for pair, pts in sorted(pair_points.items()):
        ends = tuple(sorted(vert_pos[p] for p in pts if p in true_vertex))
        edge_faces.append((pair, ends))

    facet_vsets: list[set[int]] = [set() for _ in range(n_facets)]
    for p in true_vertex:
        for m in incident_sets[p]:
            facet_vsets[m].add(vert_pos[p])

    verts = [(i,) for i in range(len(vert_list))]
    edges = [ends for _, ends in edge_faces]
    facets = [tuple(sorted(s)) for s in facet_vsets]
    fv = (len(verts), len(edges), len(facets))

    # incidence: vertex -> edges, edge -> facets
    v2e: list[list[int]] = [[] for _ in verts]
    for ei, ends in enumerate(edges):
        for vi in ends:
            v2e[vi].append(ei)
    e2f: list[list[int]] = [list(pair) for pair, _ in edge_faces]

    return FaceLattice(dim=3, faces=[verts, edges, facets],
                       incidence=[v2e, e2f], f_vector=fv,
                       euler_ok=_euler_holds(fv, 3),
                       vertex_points=P[np.asarray(vert_list, dtype=np.int64)])