"""Stratified placement of cap-cover regions and the witness-collector
structure.

The cover built at width alpha = c1*eps/log(1/eps) is grouped by dyadic
region volume; group j is scaled into the shrunken copy K_j = gamma^j K,
gamma = 1 - 4*d*beta*alpha, so each placed body R_i lies in its own layer
L_j = K_j \\ K_{j+1}. Collectors are unions over r <= j of sigma-expanded
caps of K_r cut parallel to the region's own cap. One sample point per
placed body defines the approximating hull.

The layer count t must satisfy the support-gap requirement
2*t*d*beta*alpha <= eps for the width-eps stabbing argument to survive the
inward displacement of deep groups; the builder re-derives alpha from that
bound (one cover rebuild) whenever the empirical group count exceeds one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .canonical import CanonicalBody
from .cover import CapCover, build_cap_cover
from .errors import EpsilonTooLarge, ValidationError
from .geometry import (
    TAU_LP,
    HPolytope,
    cap_vertex_set,
    gjk_separated,
    section_ring,
    support_batch,
)
from .macbeath import Constants, macbeath
from .nets import net_size


@dataclass
class DichotomyResult:
    case: str                     # witness-inside | cap-inside-collector |
    index: int | None = None      # outside-body | failure


@dataclass
class StratifiedCover:
    body: CanonicalBody
    consts: Constants
    eps: float
    alpha: float
    gamma: float
    t: int
    cover: CapCover
    group_of: np.ndarray
    c3_emp: float
    c2_emp: float
    samples: np.ndarray
    s_minus: np.ndarray                    # support of K along -u_i per region
    coll_offsets: list[np.ndarray]         # per i: sigma-cap base offset per r
    coll_clamped: list[np.ndarray]
    rebuilt: bool = False

    @property
    def k(self) -> int:
        return len(self.cover)

    def layer_body(self, j: int) -> HPolytope:
        return self.body.body.scaled(self.gamma ** j)

    def witness_verts(self, i: int) -> np.ndarray:
        return self.cover.regions[i].verts * self.gamma ** int(self.group_of[i])

    def witness_center(self, i: int) -> np.ndarray:
        return self.cover.regions[i].x * self.gamma ** int(self.group_of[i])

    def group_histogram(self) -> np.ndarray:
        return np.bincount(self.group_of, minlength=self.t)

    def to_json(self) -> dict:
        return {
            "constants": self.consts.record(),
            "eps": self.eps,
            "alpha": self.alpha,
            "gamma": self.gamma,
            "t": self.t,
            "k": self.k,
            "group_histogram": self.group_histogram().tolist(),
            "samples": self.samples.tolist(),
            "rebuilt": self.rebuilt,
        }


def assign_groups(cover: CapCover, alpha: float, consts: Constants):
    """Dyadic volume groups: group_of[i] = floor(log2(vmax / vol_i))."""
    vols = cover.volumes
    if np.any(vols <= 0.0):
        raise ValidationError("zero-volume region in cover (degenerate geometry)")
    vmax = float(np.max(vols))
    c3_emp = vmax / alpha
    raw = np.floor(np.log2(vmax / vols + 1e-15)).astype(np.int64)
    t_emp = int(np.max(raw)) + 1
    cap = max(1, int(math.floor(consts.c4 * math.log2(1.0 / alpha))))
    return raw, min(t_emp, cap), c3_emp


def build_layers(k: CanonicalBody, gamma: float, t: int) -> list[HPolytope]:
    """K_j = gamma^j K for j = 0..t (halfspace offsets scale linearly)."""
    if not 0.0 < gamma < 1.0:
        raise ValidationError("gamma must lie in (0, 1)")
    if t < 1:
        raise ValidationError("need at least one layer")
    return [k.body.scaled(gamma ** j) for j in range(t + 1)]


def _paper_alpha(eps: float, consts: Constants) -> float:
    d, beta = consts.d, consts.beta
    alpha = eps
    for _ in range(60):
        t = max(1, int(math.floor(consts.c4 * math.log2(1.0 / alpha))))
        nxt = 0.9 * eps / (2.0 * t * d * beta)
        if abs(nxt - alpha) <= 1e-14:
            break
        alpha = nxt
    return alpha


def build_stratified(k: CanonicalBody, eps: float,
                     consts: Constants) -> StratifiedCover:
    """Run the full stratified construction at error target eps."""
    if not 0.0 < eps < 1.0:
        raise ValidationError("eps must lie in (0, 1)")
    d = k.dim
    beta = consts.beta
    L = math.log(1.0 / eps)
    if consts.preset == "paper":
        alpha0 = _paper_alpha(eps, consts)
        theta = consts.c_net * math.sqrt(alpha0)
        if net_size(d, theta) > 6_000_000:
            raise EpsilonTooLarge(
                "paper-preset constants need a direction net of "
                f"{net_size(d, theta)} points at eps={eps}; the bound "
                "2 t d beta alpha <= eps is not reachable at desk scale")
    else:
        if eps > consts.eps_gate:
            raise EpsilonTooLarge(f"eps above preset gate {consts.eps_gate}")
        # gamma = 1 - 4 d beta alpha must stay positive; single-group builds
        # otherwise keep alpha proportional to eps/log(1/eps)
        alpha0 = min(consts.c1_base * eps / L, consts.width_gate * 0.999,
                     0.98 / (4.0 * d * beta))

    cover = build_cap_cover(k, alpha0, consts)
    raw, t_emp, c3 = assign_groups(cover, alpha0, consts)
    alpha = alpha0
    rebuilt = False
    if t_emp == 1:
        t = 1
    else:
        t_target = min(t_emp, consts.t_max)
        alpha1 = min(alpha0, 0.9 * eps / (2.0 * t_target * d * beta))
        if alpha1 < alpha0 * 0.999:
            alpha = alpha1
            cover = build_cap_cover(k, alpha, consts)
            raw, t_emp, c3 = assign_groups(cover, alpha, consts)
            rebuilt = True
        t = min(t_emp, t_target)
    group_of = np.minimum(raw, t - 1)

    gamma = 1.0 - 4.0 * d * beta * alpha
    if gamma <= 0.0:
        raise EpsilonTooLarge("gamma collapsed; eps too large for the preset")

    vols = cover.volumes
    c2_emp = float(np.min(vols)) / alpha ** d
    scales = gamma ** group_of
    samples = cover.centers * scales[:, None]

    # supports of K along -u_i (for collector clamping), batched
    s_minus, _ = support_batch(k.body, -cover.dirs)

    sigma = consts.sigma
    coll_offsets: list[np.ndarray] = []
    coll_clamped: list[np.ndarray] = []
    for i in range(len(cover)):
        j = int(group_of[i])
        s_i = cover.regions[i].support_value
        base_j = gamma ** j * (s_i - beta * alpha)
        rr = np.arange(j + 1)
        sup_r = gamma ** rr * s_i
        w_ir = sup_r - base_j
        off = sup_r - sigma * w_ir
        floor_r = -(gamma ** rr) * s_minus[i]
        clamped = off <= floor_r
        coll_offsets.append(np.maximum(off, floor_r))
        coll_clamped.append(clamped)

    return StratifiedCover(body=k, consts=consts, eps=eps, alpha=alpha,
                           gamma=gamma, t=t, cover=cover, group_of=group_of,
                           c3_emp=c3, c2_emp=c2_emp, samples=samples,
                           s_minus=s_minus, coll_offsets=coll_offsets,
                           coll_clamped=coll_clamped, rebuilt=rebuilt)


# -- dichotomy --------------------------------------------------------------


def _witness_search(sc: StratifiedCover, u: np.ndarray, c: float) -> int:
    """Index of a placed body contained in {<u,z> >= c}, or -1."""
    cov = sc.cover
    scales = sc.gamma ** sc.group_of
    centers = cov.centers * scales[:, None]
    depth = centers @ u
    cand = np.nonzero(depth + scales * cov.r_circs >= c - TAU_LP)[0]
    if len(cand) == 0:
        return -1
    cand = cand[np.argsort(-depth[cand])]
    for a in cand:
        r = cov.regions[a]
        lo = scales[a] * float(np.min(r.verts @ u))
        if lo >= c - TAU_LP:
            return int(a)
    return -1


def _line_clip_points(body_A, body_b, z0, ldir, tol=1e-12):
    """Endpoints of {z0 + t ldir} ∩ {A z <= b}, or None if empty."""
    num = body_b - body_A @ z0
    den = body_A @ ldir
    t_lo, t_hi = -np.inf, np.inf
    pos = den > tol
    neg = den < -tol
    if np.any(pos):
        t_hi = float(np.min(num[pos] / den[pos]))
    if np.any(neg):
        t_lo = float(np.max(num[neg] / den[neg]))
    if np.any((~pos) & (~neg) & (num < -tol)):
        return None
    if t_lo > t_hi:
        return None
    if not np.isfinite(t_lo) or not np.isfinite(t_hi):
        return None
    return np.vstack([z0 + t_lo * ldir, z0 + t_hi * ldir])


def _chain_region_points(sc: StratifiedCover, r: int, u_c: np.ndarray,
                         c_c: float, u_m: np.ndarray, off_m: float):
    """Vertices of C ∩ K_r ∩ {<u_m, z> <= off_m} (exact for d <= 3)."""
    K = sc.body.body
    g = sc.gamma ** r
    pts = []
    # body vertices inside both cuts (work in unscaled coordinates)
    inside = cap_vertex_set(K, u_c, c_c / g)
    if len(inside):
        Vin = K.V[inside]
        keep = Vin @ u_m <= off_m / g + TAU_LP
        if np.any(keep):
            pts.append(g * Vin[keep])
    # ring of the C-cut clipped by the u_m cut, and vice versa
    try:
        ring1 = g * section_ring(K, u_c, c_c / g)
        keep = ring1 @ u_m <= off_m + TAU_LP * g
        if np.any(keep):
            pts.append(ring1[keep])
    except Exception:
        pass
    try:
        ring2 = g * section_ring(K, u_m, off_m / g)
        keep = ring2 @ u_c >= c_c - TAU_LP * g
        if np.any(keep):
            pts.append(ring2[keep])
    except Exception:
        pass
    # the two cutting planes' common line, clipped to K_r
    if K.dim == 3:
        ldir = np.cross(u_c, u_m)
        nl = np.linalg.norm(ldir)
        if nl > 1e-9:
            ldir = ldir / nl
            # solve point on both planes in the span of u_c, u_m
            G = np.array([[1.0, float(u_c @ u_m)], [float(u_c @ u_m), 1.0]])
            try:
                ab = np.linalg.solve(G, np.array([c_c, off_m]))
                z0 = ab[0] * u_c + ab[1] * u_m
                seg = _line_clip_points(K.A, g * K.b, z0, ldir)
                if seg is not None:
                    pts.append(seg)
            except np.linalg.LinAlgError:
                pass
    else:
        ldir = None  # in d=2 the two lines meet in a point
        det = u_c[0] * u_m[1] - u_c[1] * u_m[0]
        if abs(det) > 1e-12:
            p = np.linalg.solve(np.vstack([u_c, u_m]),
                                np.array([c_c, off_m]))
            if np.all(K.A @ p <= g * K.b + TAU_LP):
                pts.append(p[None, :])
    if not pts:
        return None
    return np.vstack(pts)


def collector_contains_cap(sc: StratifiedCover, m: int, u_c: np.ndarray,
                           c_c: float) -> bool:
    """Layer-by-layer test of C ⊆ C_m for the cap C = K ∩ {<u_c,z> >= c_c}.

    For every r <= j(m) the part of C in K_r beyond the sigma-expanded cap
    must already lie in K_{r+1}, and C must not reach below K_{j+1}.
    """
    K = sc.body.body
    j = int(sc.group_of[m])
    u_m = sc.cover.dirs[m]
    sup_c = float(np.max(K.V @ u_c))
    # C must not meet the interior of K_{j+1}
    if sc.gamma ** (j + 1) * sup_c > c_c + TAU_LP:
        return False
    for r in range(j + 1):
        off = float(sc.coll_offsets[m][r])
        if sc.coll_clamped[m][r]:
            continue  # expanded cap swallows all of K_r
        g_sup = sc.gamma ** r * sup_c
        if g_sup < c_c - TAU_LP:
            continue  # C misses K_r entirely
        pts = _chain_region_points(sc, r, u_c, c_c, u_m, off)
        if pts is None:
            continue
        inner = sc.gamma ** (r + 1) * sc.body.body.b
        if not np.all(pts @ K.A.T <= inner[None, :] + TAU_LP):
            return False
    return True


def witness_collector_check(sc: StratifiedCover, normal: np.ndarray,
                            offset: float) -> DichotomyResult:
    """Resolve a halfspace query against the witness-collector structure."""
    n = np.asarray(normal, dtype=float)
    nn = np.linalg.norm(n)
    if nn == 0.0:
        raise ValidationError("zero normal")
    n = n / nn
    offset = float(offset) / nn
    K = sc.body.body
    u_c = -n
    c_c = -offset
    sup_c = float(np.max(K.V @ u_c))
    if c_c > sup_c + TAU_LP:
        return DichotomyResult(case="outside-body")
    i = _witness_search(sc, u_c, c_c)
    if i >= 0:
        return DichotomyResult(case="witness-inside", index=i)
    # collector branch: the construction always pairs C with the width-alpha
    # cap in C's direction (it contains C whenever C is narrower)
    c_sub = sup_c - sc.alpha
    cov = sc.cover
    depth = cov.centers @ u_c
    cand = np.nonzero(depth + cov.r_circs >= c_sub - TAU_LP)[0]
    if len(cand) == 0:
        return DichotomyResult(case="failure")
    # nearest to the subcap axis first, then by depth
    cand = cand[np.argsort(-(depth[cand]))]
    tried = 0
    for m in cand:
        if collector_contains_cap(sc, int(m), u_c, c_c):
            return DichotomyResult(case="cap-inside-collector", index=int(m))
        tried += 1
        if tried >= 24:
            break
    # fall back to the regions whose M' meets M'(x') per the construction
    try:
        inside = cap_vertex_set(K, u_c, c_sub)
        ring = section_ring(K, u_c, c_sub, inside_idx=inside)
        if K.dim == 2:
            xq = 0.5 * (ring[0] + ring[1])
        else:
            from .geometry import polygon_centroid_3d
            xq = polygon_centroid_3d(ring)
        reg = macbeath(K, xq, 0.2, axis_hint=u_c)
        vq = reg.verts
        near = np.argsort(np.linalg.norm(cov.centers - xq[None, :], axis=1))
        for m in near[:16]:
            if gjk_separated(vq, cov.regions[int(m)].verts, TAU_LP):
                continue
            if collector_contains_cap(sc, int(m), u_c, c_c):
                return DichotomyResult(case="cap-inside-collector",
                                       index=int(m))
    except Exception:
        pass
    return DichotomyResult(case="failure")


# -- collector overlap and hull ---------------------------------------------


def collector_overlaps(sc: StratifiedCover, chunk: int = 512) -> np.ndarray:
    """Number of placed bodies each collector intersects.

    A body in layer r can only meet collector i through its layer-r part,
    so the test is a reach test against the sigma-cap there.
    """
    cov = sc.cover
    k = len(cov)
    scales = sc.gamma ** sc.group_of
    counts = np.zeros(k, dtype=np.int64)
    layer_members: list[np.ndarray] = [
        np.nonzero(sc.group_of == r)[0] for r in range(sc.t)]
    for i in range(k):
        u = cov.dirs[i]
        j = int(sc.group_of[i])
        dots = cov.centers @ u
        for r in range(j + 1):
            members = layer_members[r]
            if len(members) == 0:
                continue
            off = float(sc.coll_offsets[i][r])
            g = sc.gamma ** r
            cand = members[(dots[members] + cov.r_circs[members]) * g
                           >= off - TAU_LP]
            for m in cand:
                reach = g * float(np.max(cov.regions[int(m)].verts @ u))
                if reach >= off - TAU_LP:
                    counts[i] += 1
    return counts


def approx_polytope(sc: StratifiedCover):
    """Hull of the sample set plus its face lattice."""
    from .lattice import face_lattice
    from .geometry import VPolytope

    p = VPolytope(sc.samples)
    lattice = face_lattice(p)
    return p, lattice