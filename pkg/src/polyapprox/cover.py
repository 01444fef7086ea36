"""Width-based economical cap covering by greedy Macbeath-region packing.

For a width parameter w, every direction of a deterministic net of spacing
c_net*sqrt(w) proposes the cap of width w/beta in that direction; the
candidate's shrunken Macbeath region M'(base centroid) is accepted when it
is disjoint from every region accepted so far. Collectors are the beta^2
cap expansions. Properties (pairwise disjointness, stabbing, the cap
sandwich) are verified empirically by the report operations below.

The greedy scan is exact; a deterministic center-proximity prefilter skips
candidates whose estimated base point already lies well inside an accepted
region before any exact geometry is built (the net can reach millions of
directions for deep stratified builds). Skips can only shrink the packing,
never break disjointness; verify_stabbing is the safety net for coverage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .canonical import CanonicalBody
from .errors import EmptySection, ValidationError, WidthTooLarge
from .geometry import (
    INTERSECT,
    TAU_LP,
    HPolytope,
    cap_vertex_set,
    convex_sets_disjoint,
    gjk_classify,
    gjk_distance,
    gjk_separated,
    section_ring,
    polygon_centroid_3d,
    support_batch,
    symmetrized_section,
    volume_of_vertices,
)
from .macbeath import Cap, Constants, MRegion, cap_of_width, expand_cap, macbeath
from .nets import direction_net, net_size

NET_MAX = 6_000_000
_CHUNK = 16384
# circumradius above which a region joins the whole-chunk stab sweep
_LONG_R = 0.04


@dataclass
class CoverRegion:
    """One accepted packing element: cap A_i and region R'_i = M'(x_i)."""

    x: np.ndarray
    u: np.ndarray
    support_value: float
    base_offset: float
    delta: float              # boundary distance at x
    verts: np.ndarray         # exact vertices of M'(x)
    r_circ: float
    volume: float
    net_index: int

    @property
    def width(self) -> float:
        return self.support_value - self.base_offset


@dataclass
class CapCover:
    body: CanonicalBody
    consts: Constants
    width_param: float
    beta_eff: float
    net_spacing: float
    net_count: int
    candidates_evaluated: int
    regions: list[CoverRegion]
    centers: np.ndarray = field(default=None, repr=False)
    dirs: np.ndarray = field(default=None, repr=False)
    r_circs: np.ndarray = field(default=None, repr=False)
    deltas: np.ndarray = field(default=None, repr=False)
    volumes: np.ndarray = field(default=None, repr=False)
    # concatenated region vertices for batched min/max-dot reductions
    all_verts: np.ndarray = field(default=None, repr=False)
    vert_offsets: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        k = len(self.regions)
        d = self.body.dim
        self.centers = np.array([r.x for r in self.regions]).reshape(k, d)
        self.dirs = np.array([r.u for r in self.regions]).reshape(k, d)
        self.r_circs = np.array([r.r_circ for r in self.regions])
        self.deltas = np.array([r.delta for r in self.regions])
        self.volumes = np.array([r.volume for r in self.regions])
        counts = np.array([len(r.verts) for r in self.regions], dtype=np.int64)
        self.vert_offsets = np.concatenate([[0], np.cumsum(counts)])
        self.all_verts = (np.vstack([r.verts for r in self.regions])
                          if k else np.zeros((0, d)))

    def __len__(self) -> int:
        return len(self.regions)

    def base_cap(self, i: int) -> Cap:
        r = self.regions[i]
        return cap_of_width(self.body.body, r.u, r.width,
                            support_value=r.support_value, lazy=True)

    def collector_cap(self, i: int) -> Cap:
        return expand_cap(self.base_cap(i), self.beta_eff ** 2)

    def region_min_dots(self, u: np.ndarray) -> np.ndarray:
        """min <u, v> over each region's vertices (batched)."""
        dots = self.all_verts @ u
        return np.minimum.reduceat(dots, self.vert_offsets[:-1])

    def region_max_dots(self, u: np.ndarray) -> np.ndarray:
        dots = self.all_verts @ u
        return np.maximum.reduceat(dots, self.vert_offsets[:-1])

    def to_json(self) -> dict:
        return {
            "width_param": self.width_param,
            "beta_eff": self.beta_eff,
            "net_spacing": self.net_spacing,
            "net_count": self.net_count,
            "constants": self.consts.record(),
            "caps": [
                {"direction": r.u.tolist(), "width": r.width,
                 "centroid": r.x.tolist()} for r in self.regions
            ],
            "regions": [
                {"center": r.x.tolist(), "vertices": r.verts.tolist()}
                for r in self.regions
            ],
        }


class _Buf:
    """Growable (n, d) point buffer with a scalar side channel."""

    def __init__(self, dim: int, cap: int = 1024):
        self.pts = np.empty((cap, dim))
        self.val = np.empty(cap)
        self.n = 0

    def add(self, x: np.ndarray, v: float):
        if self.n == len(self.pts):
            self.pts = np.vstack([self.pts, np.empty_like(self.pts)])
            self.val = np.concatenate([self.val, np.empty_like(self.val)])
        self.pts[self.n] = x
        self.val[self.n] = v
        self.n += 1


class _OctaveIndex:
    """Radius-bucketed KD-trees over accepted centers for range queries
    against regions whose circumradii span orders of magnitude."""

    def __init__(self, dim: int):
        self.dim = dim
        self.buckets: dict[int, dict] = {}

    def add(self, idx: int, x: np.ndarray, r: float):
        key = max(-60, min(10, int(math.floor(math.log2(max(r, 1e-18))))))
        b = self.buckets.get(key)
        if b is None:
            b = {"idx": [], "buf": _Buf(self.dim), "tree": None,
                 "tree_n": 0, "rmax": 0.0}
            self.buckets[key] = b
        b["idx"].append(idx)
        b["buf"].add(x, r)
        b["rmax"] = max(b["rmax"], r)

    def query(self, x: np.ndarray, extra: float) -> list[int]:
        """Indices of accepted regions with |x - x_a| <= extra + r_circ_a
        (superset, by bucket rmax)."""
        out: list[int] = []
        for b in self.buckets.values():
            rad = extra + b["rmax"] + 1e-12
            buf = b["buf"]
            tn = b["tree_n"]
            if tn and b["tree"] is not None:
                for j in b["tree"].query_ball_point(x, rad):
                    out.append(b["idx"][j])
            if buf.n > tn:
                tail = buf.pts[tn:buf.n] - x[None, :]
                dd2 = np.einsum("ij,ij->i", tail, tail)
                for j in np.nonzero(dd2 <= rad * rad)[0]:
                    out.append(b["idx"][tn + int(j)])
        return out

    def refresh(self):
        for b in self.buckets.values():
            buf = b["buf"]
            if buf.n > b["tree_n"]:
                b["tree"] = cKDTree(buf.pts[:buf.n].copy())
                b["tree_n"] = buf.n


def _centroid_of_cap(K: HPolytope, u: np.ndarray, c: float, wit: int):
    inside = cap_vertex_set(K, u, c, witness_idx=wit)
    if len(inside) == 0:
        raise EmptySection("cap below vertex resolution")
    ring = section_ring(K, u, c, inside_idx=inside)
    if K.dim == 2:
        return 0.5 * (ring[0] + ring[1]), ring
    return polygon_centroid_3d(ring), ring


def build_cap_cover(k: CanonicalBody, w: float, consts: Constants,
                    max_regions: int | None = None) -> CapCover:
    """Greedy maximal packing over the deterministic direction net."""
    K = k.body
    d = K.dim
    if not 0.0 < w <= consts.width_gate + 1e-12:
        raise WidthTooLarge(
            f"cover width {w} outside (0, {consts.width_gate}] "
            f"({consts.preset} preset)")
    beta = consts.beta
    w_pack = w / beta
    theta = consts.c_net * math.sqrt(w)
    if net_size(d, theta) > NET_MAX:
        raise ValidationError(
            f"direction net would need {net_size(d, theta)} directions")
    U = direction_net(d, theta)
    n = len(U)
    sup, wit = support_batch(K, U)

    regions: list[CoverRegion] = []
    region_hreps: list[tuple[np.ndarray, np.ndarray]] = []
    oct_index = _OctaveIndex(d)
    centers = _Buf(d)
    tree = None
    tree_n = 0
    evaluated = 0
    long_regions: list[int] = []
    # search radius for regions that could stab the width-w cap at a
    # direction: its base extent plus a few widths of slack
    stab_rq = 1.3 * math.sqrt(2.0 * 0.5 * w) + 6.0 * w
    margin0 = 0.75 * theta * theta
    for start in range(0, n, _CHUNK):
        end = min(n, start + _CHUNK)
        Uc = U[start:end]
        m_chunk = end - start
        apex_pts = K.V[wit[start:end]]
        if tree_n:
            kq = min(8, tree_n)
            sd, sn = tree.query(apex_pts, k=kq)
            if kq == 1:
                sd, sn = sd[:, None], sn[:, None]
            # chunk-vectorized stab-skip. The tilt margin is anchored at the
            # depth-attaining vertex v*: for any direction u' within theta
            # of u, depth(u') <= depth(u) + theta |p_w - v*| + margin0, so
            # a hit certifies every net-neighbor direction stays stabbed.
            r_sn = centers.val[sn]
            pw_u_arr = np.einsum("md,md->m", apex_pts, Uc)
            ctr_u = np.einsum("mkd,md->mk", centers.pts[sn], Uc)
            lb = pw_u_arr[:, None] - (ctr_u + r_sn)
            stab_maybe = (lb <= w - margin0) & (sd <= stab_rq)
            pre_skip = np.zeros(m_chunk, dtype=bool)
            rows, cols = np.nonzero(stab_maybe)
            if len(rows):
                pair_a = sn[rows, cols]
                order_a = np.argsort(pair_a, kind="stable")
                rows_o = rows[order_a]
                a_sorted = pair_a[order_a]
                starts = np.concatenate(
                    [[0], np.nonzero(np.diff(a_sorted))[0] + 1,
                     [len(a_sorted)]])
                for bi in range(len(starts) - 1):
                    lo, hi = starts[bi], starts[bi + 1]
                    a = int(a_sorted[lo])
                    rr = rows_o[lo:hi]
                    va = regions[a].verts
                    dots = va @ Uc[rr].T
                    am = np.argmin(dots, axis=0)
                    depth = pw_u_arr[rr] - dots[am, np.arange(len(rr))]
                    rel = apex_pts[rr] - va[am]
                    marg = theta * np.sqrt(np.einsum("ij,ij->i", rel, rel))
                    hit = depth + marg <= w - margin0
                    pre_skip[rr[hit]] = True
            # long regions (full edges, slabs) are rarely among the nearest
            # centers; sweep them against the whole chunk
            for a in long_regions:
                va = regions[a].verts
                dots = va @ Uc.T
                am = np.argmin(dots, axis=0)
                depth = pw_u_arr - dots[am, np.arange(m_chunk)]
                rel = apex_pts - va[am]
                marg = theta * np.sqrt(np.einsum("ij,ij->i", rel, rel))
                pre_skip |= depth + marg <= w - margin0
        else:
            sd = sn = None
            pre_skip = np.zeros(m_chunk, dtype=bool)
        for j in range(m_chunk):
            gi = start + j
            u = Uc[j]
            c = sup[gi] - w_pack
            skip = False
            # --- stabbed-direction skip: when the width-w cap at u (the
            # stabbing target of the cover) already contains an accepted
            # region with a net-tilt margin, every direction within the net
            # spacing of u keeps a stabbed cap; the margin is anchored at
            # the support witness, exact across corner fans and
            # second-order elsewhere
            if centers.n:
                if pre_skip[j]:
                    continue
                if centers.n > tree_n:
                    p_w = apex_pts[j]
                    pw_u = float(p_w @ u)
                    tail = centers.pts[tree_n:centers.n] - p_w[None, :]
                    dd2 = np.einsum("ij,ij->i", tail, tail)
                    for t in np.nonzero(dd2 <= stab_rq ** 2)[0]:
                        a = tree_n + int(t)
                        ra = regions[a]
                        dist = math.sqrt(float(dd2[t]))
                        budget = w - theta * (dist + ra.r_circ) - margin0
                        if budget <= 0.0:
                            continue
                        if pw_u - (float(ra.x @ u) - ra.r_circ) > budget:
                            continue
                        depth = pw_u - float(np.min(ra.verts @ u))
                        if depth <= budget:
                            skip = True
                            break
            if skip:
                continue
            evaluated += 1
            # --- exact geometry
            try:
                x, ring = _centroid_of_cap(K, u, c, int(wit[gi]))
            except EmptySection:
                continue
            # certified inner slice of M'(x) from the ring already in hand:
            # touching an accepted region certifies the rejection without
            # building the candidate's full geometry
            inner = x + 0.2 * (symmetrized_section(x, ring, u) - x)
            r_inner = math.sqrt(float(np.max(
                np.einsum("ij,ij->i", inner - x, inner - x))))
            rejected = False
            near = oct_index.query(x, r_inner)
            if len(near) > 1:
                na = np.asarray(near, dtype=np.int64)
                rel = centers.pts[na] - x[None, :]
                near = na[np.argsort(np.einsum("ij,ij->i", rel, rel))]
            for a in near:
                ra = regions[a]
                Aa, ba = region_hreps[a]
                if np.all(Aa @ x <= ba + TAU_LP):
                    rejected = True
                    break
                dxa = x - ra.x
                if float(np.sqrt(dxa @ dxa)) > r_inner + ra.r_circ:
                    continue
                # any inner vertex inside the accepted region settles it
                if np.any(np.all(inner @ Aa.T <= ba[None, :] + TAU_LP,
                                 axis=1)):
                    rejected = True
                    break
                # not-certified-separated is treated as overlap here: the
                # packing stays disjoint either way and coverage is held to
                # account by the stabbing checks
                if len(inner) > 1 and not gjk_separated(inner, ra.verts,
                                                        0.0, max_iter=24):
                    rejected = True
                    break
            if rejected:
                continue
            reg = macbeath(K, x, 0.2, axis_hint=u)
            try:
                verts = reg.verts
            except Exception:
                continue
            r_circ = reg.r_circ
            delta = reg.r_in * 5.0
            # --- disjointness against accepted neighbors
            for a in oct_index.query(x, r_circ):
                ra = regions[a]
                dxa = x - ra.x
                gap = float(np.sqrt(dxa @ dxa))
                if gap > r_circ + ra.r_circ + TAU_LP:
                    continue
                if gap <= (delta + ra.delta) * 0.2:
                    rejected = True          # inscribed balls overlap
                    break
                if not convex_sets_disjoint(verts, ra.verts, TAU_LP,
                                            probe_dirs=(u, ra.u)):
                    rejected = True
                    break
            if rejected:
                continue
            idx = len(regions)
            regions.append(CoverRegion(
                x=x, u=u, support_value=float(sup[gi]), base_offset=float(c),
                delta=delta, verts=verts, r_circ=r_circ,
                volume=volume_of_vertices(verts), net_index=gi))
            region_hreps.append((reg.A, reg.b))
            oct_index.add(idx, x, r_circ)
            centers.add(x, r_circ)
            if r_circ > _LONG_R:
                long_regions.append(idx)
            if max_regions and len(regions) >= max_regions:
                break
        # chunk boundary: refresh spatial indexes
        oct_index.refresh()
        if centers.n > tree_n:
            tree = cKDTree(centers.pts[:centers.n].copy())
            tree_n = centers.n
        if max_regions and len(regions) >= max_regions:
            break

    if not regions:
        raise ValidationError("cap cover came out empty")
    return CapCover(body=k, consts=consts, width_param=w, beta_eff=beta,
                    net_spacing=theta, net_count=n,
                    candidates_evaluated=evaluated, regions=regions)


# -- reports ---------------------------------------------------------------


@dataclass
class StabbingReport:
    samples: int
    failures: int
    worst_direction: np.ndarray | None
    sandwich_checked: int = 0
    sandwich_failures: int = 0


def verify_stabbing(k: CanonicalBody, cover: CapCover, w: float,
                    nsamples: int, seed: int,
                    check_sandwich: bool = False) -> StabbingReport:
    """Sample width-w caps; each must contain some accepted region, and the
    found collector must sandwich the cap when the check is enabled."""
    if nsamples <= 0:
        return StabbingReport(samples=0, failures=0, worst_direction=None)
    K = k.body
    d = K.dim
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((nsamples, d))
    U /= np.linalg.norm(U, axis=1)[:, None]
    sup, _ = support_batch(K, U)
    failures = 0
    worst = None
    s_checked = 0
    s_failures = 0
    for i in range(nsamples):
        u = U[i]
        c = sup[i] - w
        depth = cover.centers @ u
        cand = np.nonzero(depth + cover.r_circs >= c)[0]
        cand = cand[np.argsort(-(depth[cand]))]
        found = -1
        for a in cand:
            r = cover.regions[a]
            if float(np.min(r.verts @ u)) >= c - TAU_LP:
                found = int(a)
                break
        if found < 0:
            failures += 1
            worst = u
            continue
        if check_sandwich:
            s_checked += 1
            if not _sandwich_holds(K, cover, found, u, c):
                s_failures += 1
    return StabbingReport(samples=nsamples, failures=failures,
                          worst_direction=worst, sandwich_checked=s_checked,
                          sandwich_failures=s_failures)


def _sandwich_holds(K: HPolytope, cover: CapCover, i: int, u: np.ndarray,
                    c: float) -> bool:
    """A_i ⊆ C and C ⊆ A_i^(beta^2) for the sampled cap C = {<u,z> >= c}."""
    r = cover.regions[i]
    beta2 = cover.beta_eff ** 2
    tol = 1e-9
    cap_a = cover.base_cap(i)
    if float(np.min(cap_a.vertex_set() @ u)) < c - tol:
        return False
    coll_off = r.support_value - beta2 * r.width
    try:
        inside = cap_vertex_set(K, u, c)
        ring = section_ring(K, u, c, inside_idx=inside)
        cap_pts = np.vstack([K.V[inside], ring])
    except EmptySection:
        return True
    return bool(np.min(cap_pts @ r.u) >= coll_off - tol)


@dataclass
class PruneResult:
    kept: list[int]
    ratio: float


def prune_cover(cover: CapCover) -> PruneResult:
    """Greedy smallest-volume-first pruning: each selected region knocks out
    every region whose M' reaches into the 4-expansion of its cap."""
    k = len(cover)
    order = np.argsort(cover.volumes, kind="stable")
    alive = np.ones(k, dtype=bool)
    kept: list[int] = []
    for i in order:
        if not alive[i]:
            continue
        kept.append(int(i))
        r = cover.regions[i]
        off4 = r.support_value - 4.0 * r.width
        reach = cover.region_max_dots(r.u)
        alive &= reach < off4 - TAU_LP
        alive[i] = False
    return PruneResult(kept=kept, ratio=k / max(1, len(kept)))


def dudley_project(k: CanonicalBody, x_centroid: np.ndarray,
                   direction: np.ndarray) -> np.ndarray:
    """Project along the cap normal onto the radius-2 sphere about O."""
    x = np.asarray(x_centroid, dtype=float)
    u = np.asarray(direction, dtype=float)
    nx = float(x @ x)
    if nx >= 4.0:
        raise ValidationError("point lies outside the projection sphere")
    xu = float(x @ u)
    t = -xu + math.sqrt(xu * xu + 4.0 - nx)
    return x + t * u