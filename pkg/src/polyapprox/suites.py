"""Randomized property suites for the geometric facts the pipeline uses.

Each suite draws seeded instances, filters for the fact's precondition,
and counts violations at the package tolerances. Suites are deterministic
given (dimension, sample count, seed) and shared between the CLI `check`
command and the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bodies import ball_polytope, cube_polytope, cylinder_polytope, random_hull_polytope
from .canonical import CanonicalBody, canonicalize
from .cover import build_cap_cover, dudley_project, prune_cover, verify_stabbing
from .errors import EmptySection, PolyApproxError
from .geometry import TAU_LP, contains_vrep, gjk_separated, support_batch, volume_of_vertices
from .macbeath import Cap, Constants, cap_of_width, expand_cap, macbeath
from .metrics import delta_and_ray, hausdorff_inner
from .nets import direction_net
from .stratified import build_stratified, collector_overlaps, witness_collector_check

CONTAIN_TOL = 1e-9


@dataclass
class SuiteReport:
    name: str
    seed: int
    counts: dict = field(default_factory=dict)
    violations: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def record(self, key: str, ok: bool):
        self.counts[key] = self.counts.get(key, 0) + 1
        if not ok:
            self.violations[key] = self.violations.get(key, 0) + 1

    @property
    def total_violations(self) -> int:
        return int(sum(self.violations.values()))

    def ok(self) -> bool:
        return self.total_violations == 0

    def lines(self) -> list[str]:
        out = []
        for key in sorted(self.counts):
            bad = self.violations.get(key, 0)
            out.append(f"{self.name}/{key}: {self.counts[key]} checked, "
                       f"{bad} violations")
        return out


def body_pool(d: int, seed: int, eps_hint: float = 0.1) -> list[CanonicalBody]:
    """Mixed pool of canonical bodies for randomized suites.

    The lemmas hold for arbitrary convex bodies, so coarse discretizations
    of the smooth generators keep the instances honest and fast.
    """
    rng = np.random.default_rng(seed)
    pool = [canonicalize(ball_polytope(d, 0.5, eps_hint), label="ball"),
            canonicalize(cube_polytope(d), label="cube")]
    if d == 3:
        pool.append(canonicalize(cylinder_polytope(0.5, 1.0, eps_hint),
                                 label="cylinder"))
    for i in range(6):
        n = int(rng.integers(d + 3, 26))
        pool.append(canonicalize(
            random_hull_polytope(d, n, int(rng.integers(1 << 30))),
            label=f"hull{i}"))
    return pool


def _interior_point(body, rng) -> np.ndarray:
    w = rng.exponential(size=len(body.V))
    w /= w.sum()
    return w @ body.V


def _random_direction(d, rng) -> np.ndarray:
    u = rng.standard_normal(d)
    return u / np.linalg.norm(u)


def _log_uniform(rng, lo, hi) -> float:
    return float(np.exp(rng.uniform(math.log(lo), math.log(hi))))


def _random_cap(k: CanonicalBody, rng, wmin, wmax) -> Cap | None:
    u = _random_direction(k.dim, rng)
    body = k.body
    total = float(np.max(body.V @ u)) + float(np.max(body.V @ (-u)))
    hi = min(wmax, 0.9 * total)
    if hi <= wmin:
        return None
    return cap_of_width(body, u, _log_uniform(rng, wmin, hi))


def _cap_halfspace_ok(cap: Cap, pts: np.ndarray, tol=CONTAIN_TOL) -> bool:
    """pts ⊆ cap given pts ⊆ body (only the cutting halfspace matters)."""
    return bool(np.min(pts @ cap.direction) >= cap.base_offset - tol)


def suite_macbeath_lemmas(d: int, nsamples: int, seed: int) -> SuiteReport:
    """Containment facts of the cap/Macbeath calculus plus the ray-distance,
    width-volume and halfspace-scaling facts."""
    rep = SuiteReport(name="macbeath-lemmas", seed=seed)
    rng = np.random.default_rng(seed)
    pool = body_pool(d, seed)
    delta0 = 1.0 / (6 * d)
    beta = 30.0 * d
    max_tries = 30 * nsamples

    # mac-overlap: intersecting shrunken regions force M'(y) ⊆ M(x)
    done = tries = 0
    while done < nsamples and tries < max_tries:
        tries += 1
        k = pool[int(rng.integers(len(pool)))]
        x = _interior_point(k.body, rng)
        dlt = k.body.boundary_distance(x)
        if dlt <= 1e-9:
            continue
        y = x + rng.uniform(0.0, 0.9) * dlt * _random_direction(d, rng)
        if not k.body.contains_point(y):
            continue
        mx5 = macbeath(k.body, x, 0.2)
        my5 = macbeath(k.body, y, 0.2)
        try:
            if gjk_separated(mx5.verts, my5.verts, 0.0):
                continue
        except PolyApproxError:
            continue
        mx = macbeath(k.body, x, 1.0)
        rep.record("mac-overlap", contains_vrep(mx.A, mx.b, my5.verts,
                                                CONTAIN_TOL))
        done += 1

    # cap-in-region: a width-<=delta0 cap fits in M^(3d) of its base centroid
    done = tries = 0
    while done < nsamples and tries < max_tries:
        tries += 1
        k = pool[int(rng.integers(len(pool)))]
        try:
            cap = _random_cap(k, rng, delta0 / 100, delta0)
        except PolyApproxError:
            continue
        if cap is None:
            continue
        m3d = macbeath(k.body, cap.base_centroid, 3.0 * d)
        rep.record("cap-in-region",
                   contains_vrep(m3d.A, m3d.b, cap.vertex_set(), CONTAIN_TOL))
        done += 1

    # region-in-cap: M^lam(x) ⊆ C^(1+lam) for x in C, lam <= 1
    done = tries = 0
    while done < nsamples and tries < max_tries:
        tries += 1
        k = pool[int(rng.integers(len(pool)))]
        try:
            cap = _random_cap(k, rng, delta0 / 100, 3 * delta0)
        except PolyApproxError:
            continue
        if cap is None:
            continue
        cv = cap.vertex_set()
        w = rng.exponential(size=len(cv))
        w /= w.sum()
        x = w @ cv
        lam = rng.uniform(0.05, 1.0)
        try:
            m = macbeath(k.body, x, lam)
            verts = m.verts
        except PolyApproxError:
            continue
        rep.record("region-in-cap",
                   _cap_halfspace_ok(expand_cap(cap, 1.0 + lam), verts))
        done += 1

    # overlap-in-double: M'(x) meeting C forces M'(x) ⊆ C^2
    done = tries = 0
    while done < nsamples and tries < max_tries:
        tries += 1
        k = pool[int(rng.integers(len(pool)))]
        try:
            cap = _random_cap(k, rng, delta0 / 100, 3 * delta0)
        except PolyApproxError:
            continue
        if cap is None:
            continue
        x = _interior_point(k.body, rng)
        # bias toward the cap to satisfy the overlap precondition
        x = x + rng.uniform(0.2, 1.0) * (cap.base_centroid - x)
        if not k.body.contains_point(x) or k.body.boundary_distance(x) <= 1e-9:
            continue
        try:
            m5 = macbeath(k.body, x, 0.2)
        except PolyApproxError:
            continue
        if gjk_separated(m5.verts, cap.vertex_set(), 0.0):
            continue
        rep.record("overlap-in-double",
                   _cap_halfspace_ok(expand_cap(cap, 2.0), m5.verts))
        done += 1

    # sym-scaling: nested centrally symmetric bodies stay nested under
    # scaling about their own centers
    done = tries = 0
    while done < nsamples and tries < max_tries:
        tries += 1
        k = pool[int(rng.integers(len(pool)))]
        a = _interior_point(k.body, rng)
        if k.body.boundary_distance(a) <= 1e-9:
            continue
        s = rng.uniform(0.1, 1.0)
        lam = rng.uniform(1.0, 4.0)
        try:
            B = macbeath(k.body, a, 1.0)      # symmetric about a
            ainner = _interior_point(B.hpolytope(), rng)
            # A := Macbeath body of B about ainner, symmetric subset of B
            A = macbeath(B.hpolytope(), ainner, s)
            Alam = A.scaled_about_center(lam)
            Blam = B.scaled_about_center(lam)
            ok = contains_vrep(Blam.A, Blam.b, Alam.verts, CONTAIN_TOL)
        except PolyApproxError:
            continue
        rep.record("sym-scaling", ok)
        done += 1

    # sym-offcenter: scaling a symmetric body about an inner point lands
    # in the (2 lam - 1)-scaling about its center
    done = tries = 0
    while done < nsamples and tries < max_tries:
        tries += 1
        k = pool[int(rng.integers(len(pool)))]
        c0 = _interior_point(k.body, rng)
        if k.body.boundary_distance(c0) <= 1e-9:
            continue
        try:
            A = macbeath(k.body, c0, rng.uniform(0.2, 1.0))
            a = _interior_point(A.hpolytope(), rng)
            lam = rng.uniform(1.0, 4.0)
            Aprime = a + lam * (A.verts - a)
            big = A.scaled_about_center(2.0 * lam - 1.0)
            ok = contains_vrep(big.A, big.b, Aprime, CONTAIN_TOL)
        except PolyApproxError:
            continue
        rep.record("sym-offcenter", ok)
        done += 1

    # expanded-cap-in-region: C^lam ⊆ M^(3d(2lam-1))(x) for lam >= 1
    done = tries = 0
    while done < nsamples and tries < max_tries:
        tries += 1
        k = pool[int(rng.integers(len(pool)))]
        try:
            cap = _random_cap(k, rng, delta0 / 100, delta0)
        except PolyApproxError:
            continue
        if cap is None:
            continue
        lam = rng.uniform(1.0, 5.0)
        mreg = macbeath(k.body, cap.base_centroid, 3.0 * d * (2.0 * lam - 1.0))
        ex = expand_cap(cap, lam)
        rep.record("expanded-cap-in-region",
                   contains_vrep(mreg.A, mreg.b, ex.vertex_set(), CONTAIN_TOL))
        done += 1

    # cap-cap: overlapping base regions give C1^lam ⊆ C2^(beta lam)
    done = tries = 0
    while done < nsamples and tries < max_tries:
        tries += 1
        k = pool[int(rng.integers(len(pool)))]
        u1 = _random_direction(d, rng)
        tilt = rng.uniform(0.0, 0.4)
        u2 = u1 + tilt * _random_direction(d, rng)
        u2 /= np.linalg.norm(u2)
        try:
            w1 = _log_uniform(rng, delta0 / 100, delta0)
            w2 = _log_uniform(rng, delta0 / 100, delta0)
            c1 = cap_of_width(k.body, u1, w1)
            c2 = cap_of_width(k.body, u2, w2)
            m1 = macbeath(k.body, c1.base_centroid, 0.2)
            m2 = macbeath(k.body, c2.base_centroid, 0.2)
            if gjk_separated(m1.verts, m2.verts, 0.0):
                continue
        except PolyApproxError:
            continue
        lam = rng.uniform(1.0, 3.0)
        rep.record("cap-cap",
                   _cap_halfspace_ok(expand_cap(c2, beta * lam),
                                     expand_cap(c1, lam).vertex_set()))
        done += 1

    # ray-vs-delta: ray(x) <= d * delta(x)
    done = tries = 0
    while done < nsamples and tries < max_tries:
        tries += 1
        k = pool[int(rng.integers(len(pool)))]
        x = _interior_point(k.body, rng)
        dlt, ray = delta_and_ray(k, x)
        rep.record("ray-vs-delta", ray <= d * dlt + 1e-9)
        done += 1

    # width-volume: cap volume between (1/2) omega_d (a/d)^d and
    # omega_{d-1} (1/2)^{d-1} a
    omega = {1: 2.0, 2: math.pi, 3: 4.0 * math.pi / 3.0}
    done = tries = 0
    while done < nsamples and tries < max_tries:
        tries += 1
        k = pool[int(rng.integers(len(pool)))]
        a = _log_uniform(rng, 1e-3, 0.3)
        try:
            cap = cap_of_width(k.body, _random_direction(d, rng), a)
        except PolyApproxError:
            continue
        vol = volume_of_vertices(cap.vertex_set())
        hi = omega[d - 1] * (0.5) ** (d - 1) * a + 1e-12
        lo = 0.5 * omega[d] * (a / d) ** d - 1e-12
        rep.record("width-volume", lo <= vol <= hi)
        done += 1

    # scaled-nesting: nested caps scaled about a shared point stay nested
    done = tries = 0
    while done < nsamples and tries < max_tries:
        tries += 1
        k = pool[int(rng.integers(len(pool)))]
        try:
            c2 = _random_cap(k, rng, delta0 / 20, 4 * delta0)
            if c2 is None:
                continue
            u1 = c2.direction + rng.uniform(0, 0.3) * _random_direction(d, rng)
            u1 /= np.linalg.norm(u1)
            w1 = rng.uniform(0.1, 0.8) * c2.width
            c1 = cap_of_width(k.body, u1, w1)
        except PolyApproxError:
            continue
        if not _cap_halfspace_ok(c2, c1.vertex_set()):
            continue  # precondition C1 ⊆ C2
        cv = c1.vertex_set()
        wgt = rng.exponential(size=len(cv))
        wgt /= wgt.sum()
        p = wgt @ cv
        lam = rng.uniform(1.0, 4.0)
        off1 = lam * c1.base_offset + (1 - lam) * float(c1.direction @ p)
        off2 = lam * c2.base_offset + (1 - lam) * float(c2.direction @ p)
        try:
            k1 = Cap(parent=k.body, direction=c1.direction,
                     support_value=c1.support_value,
                     base_offset=max(off1, c1.base_offset - 0.9),
                     apex=c1.apex)
            pts = k1.vertex_set()
        except (PolyApproxError, EmptySection):
            continue
        ok = bool(np.min(pts @ c2.direction) >= off2 - CONTAIN_TOL)
        rep.record("scaled-nesting", ok)
        done += 1

    return rep


def suite_cover_properties(d: int, nsamples: int, seed: int) -> SuiteReport:
    """Cap-cover invariants: disjointness, the collector sandwich, stabbing,
    pruning boundedness and projection separation."""
    rep = SuiteReport(name="cover-properties", seed=seed)
    rng = np.random.default_rng(seed)
    consts = Constants.practical(d)
    w = 0.05
    k = canonicalize(ball_polytope(d, 0.5, w), label="ball")
    cover = build_cap_cover(k, w, consts)
    rep.notes.append(f"cover size {len(cover)} at w={w} (practical)")

    # pairwise disjointness, exact
    bad = 0
    for i in range(len(cover)):
        for j in range(i + 1, len(cover)):
            gap = np.linalg.norm(cover.centers[i] - cover.centers[j])
            if gap > cover.r_circs[i] + cover.r_circs[j] + TAU_LP:
                continue
            if not gjk_separated(cover.regions[i].verts,
                                 cover.regions[j].verts, TAU_LP):
                bad += 1
    rep.counts["disjointness-pairs"] = len(cover) * (len(cover) - 1) // 2
    rep.violations["disjointness-pairs"] = bad

    # Property-1 sandwich with the paper lambda: R ⊆ C_i ⊆ R^lambda
    lam = consts.lam_sandwich
    sand_bad = 0
    for i in range(len(cover)):
        r = cover.regions[i]
        coll = cover.collector_cap(i)
        if not _cap_halfspace_ok(coll, r.verts):
            sand_bad += 1
            continue
        reg = macbeath(k.body, r.x, 0.2 * lam)
        if not contains_vrep(reg.A, reg.b, coll.vertex_set(), 1e-7):
            sand_bad += 1
    rep.counts["collector-sandwich"] = len(cover)
    rep.violations["collector-sandwich"] = sand_bad

    # stabbing with the cap sandwich enabled
    stab = verify_stabbing(k, cover, w, nsamples, seed=seed,
                           check_sandwich=True)
    rep.counts["stabbing"] = stab.samples
    rep.violations["stabbing"] = stab.failures
    rep.counts["cap-sandwich"] = stab.sandwich_checked
    rep.violations["cap-sandwich"] = stab.sandwich_failures

    # pruning and the projected separation bound
    pruned = prune_cover(cover)
    rep.notes.append(f"prune ratio {pruned.ratio:.2f}")
    proj = np.array([dudley_project(k, cover.centers[i], cover.dirs[i])
                     for i in pruned.kept])
    rep.counts["projection-norm"] = len(proj)
    rep.violations["projection-norm"] = int(np.sum(
        np.abs(np.linalg.norm(proj, axis=1) - 2.0) > 1e-9))
    need = 0.95 * math.sqrt(w / cover.beta_eff)
    bad_sep = 0
    for i in range(len(proj)):
        dd = np.linalg.norm(proj[i + 1:] - proj[i][None, :], axis=1)
        bad_sep += int(np.sum(dd < need))
    rep.counts["projected-separation"] = len(proj) * (len(proj) - 1) // 2
    rep.violations["projected-separation"] = bad_sep
    return rep


def suite_layer_properties(d: int, nsamples: int, seed: int,
                           eps: float = 0.05) -> SuiteReport:
    """Support-gap and scaling facts of the layered decomposition."""
    rep = SuiteReport(name="layer-properties", seed=seed)
    rng = np.random.default_rng(seed)
    consts = Constants.practical(d)
    bodies = [canonicalize(ball_polytope(d, 0.5, eps), label="ball"),
              canonicalize(cube_polytope(d), label="cube")]
    if d == 3:
        bodies.append(canonicalize(cylinder_polytope(0.5, 1.0, eps),
                                   label="cylinder"))
    ndirs = max(64, nsamples)
    for cb in bodies:
        sc = build_stratified(cb, eps, consts)
        label = cb.label
        U = direction_net(d, 0.25 if d == 3 else 0.01)[:ndirs]
        sup, _ = support_batch(cb.body, U)
        a_bound = 2 * d * consts.beta * sc.alpha
        b_bound = consts.beta * sc.alpha
        g = sc.gamma
        ok_a = ok_b = True
        for j in range(sc.t):
            gap = (g ** j - g ** (j + 1)) * sup
            ok_a &= bool(np.all(gap <= a_bound + 1e-12))
            ok_b &= bool(np.all(gap >= b_bound - 1e-12))
        rep.record(f"gap-upper-{label}", ok_a)
        rep.record(f"gap-lower-{label}", ok_b)
        gap_t = (1.0 - g ** sc.t) * sup
        rep.record(f"outer-gap-{label}", bool(np.all(gap_t <= sc.eps + 1e-12)))
        rep.record(f"scale-range-{label}", 0.5 - 1e-12 <= g ** sc.t <= 1.0)
        vol_ok = True
        for j in range(sc.t + 1):
            ratio = g ** (j * d)
            vol_ok &= (2.0 ** (-d) - 1e-12 <= ratio <= 1.0 + 1e-12)
        rep.record(f"volume-ratio-{label}", vol_ok)
        move_ok = True
        for _ in range(nsamples):
            p = _interior_point(cb.body, rng)
            j = int(rng.integers(0, sc.t + 1))
            move = np.linalg.norm(p - g ** j * p)
            move_ok &= move <= 2 * j * d * consts.beta * sc.alpha + 1e-12
        rep.record(f"point-travel-{label}", move_ok)
    return rep


def suite_witness_collector(d: int, nsamples: int, seed: int,
                            eps: float = 0.05) -> SuiteReport:
    """Placement, sample uniqueness, dichotomy resolution, overlap counts."""
    rep = SuiteReport(name="witness-collector", seed=seed)
    rng = np.random.default_rng(seed)
    consts = Constants.practical(d)
    bodies = [canonicalize(ball_polytope(d, 0.5, eps), label="ball"),
              canonicalize(cube_polytope(d), label="cube")]
    if d == 3:
        bodies.append(canonicalize(cylinder_polytope(0.5, 1.0, eps),
                                   label="cylinder"))
    for cb in bodies:
        sc = build_stratified(cb, eps, consts)
        label = cb.label
        K = cb.body
        # placement: R_i inside K_j and beyond the support plane of K_{j+1}
        ok_place = True
        ok_sample = True
        for i in range(sc.k):
            j = int(sc.group_of[i])
            vv = sc.witness_verts(i)
            if not np.all(vv @ K.A.T <= (sc.gamma ** j) * K.b[None, :] + 1e-9):
                ok_place = False
            u_i = sc.cover.dirs[i]
            s_i = sc.cover.regions[i].support_value
            if float(np.min(vv @ u_i)) < sc.gamma ** (j + 1) * s_i - 1e-9:
                ok_place = False
            A_i, b_i = sc.cover.regions[i].x, None
            smp = sc.samples[i]
            # the sample must be the region's own point
            if not np.allclose(smp, sc.gamma ** j * sc.cover.regions[i].x):
                ok_sample = False
        rep.record(f"placement-{label}", ok_place)
        rep.record(f"one-sample-per-witness-{label}",
                   ok_sample and len(sc.samples) == sc.k)

        # dichotomy queries at mixed depths
        fails = 0
        cases = {"witness-inside": 0, "cap-inside-collector": 0,
                 "outside-body": 0}
        for q in range(nsamples):
            u = _random_direction(d, rng)
            svK = float(np.max(K.V @ u))
            mode = q % 3
            if mode == 0:
                depth = sc.eps
            elif mode == 1:
                depth = sc.eps * 10 ** rng.uniform(-5, 0)
            else:
                depth = rng.uniform(-0.1, sc.eps)
            res = witness_collector_check(sc, -u, -(svK - depth))
            if res.case == "failure":
                fails += 1
            else:
                cases[res.case] += 1
        rep.counts[f"dichotomy-{label}"] = nsamples
        rep.violations[f"dichotomy-{label}"] = fails
        rep.notes.append(f"{label}: cases {cases}, t={sc.t}, k={sc.k}")

        counts = collector_overlaps(sc)
        rep.notes.append(f"{label}: max collector overlap {int(counts.max())}")
        rep.record(f"overlap-bounded-{label}", int(counts.max()) <= 1000)
    return rep


def _sample_boundary(body, n, rng) -> np.ndarray:
    """Boundary sample: all vertices plus area-weighted random facet points."""
    from scipy.spatial import ConvexHull

    V = body.V
    if body.dim == 2:
        nxt = np.roll(np.arange(len(V)), -1)
        seg = V[nxt] - V
        lens = np.linalg.norm(seg, axis=1)
        pick = rng.choice(len(V), size=n, p=lens / lens.sum())
        t = rng.random(n)
        return np.vstack([V, V[pick] + t[:, None] * seg[pick]])
    hull = ConvexHull(V)
    simp = hull.simplices
    a, b, c = V[simp[:, 0]], V[simp[:, 1]], V[simp[:, 2]]
    areas = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
    pick = rng.choice(len(simp), size=n, p=areas / areas.sum())
    r1 = np.sqrt(rng.random(n))
    r2 = rng.random(n)
    w0 = 1 - r1
    w1 = r1 * (1 - r2)
    w2 = r1 * r2
    pts = (w0[:, None] * a[pick] + w1[:, None] * b[pick] + w2[:, None] * c[pick])
    return np.vstack([V, pts])


def suite_metrics_oracle(d: int, nsamples: int, seed: int) -> SuiteReport:
    """Exact Hausdorff vs brute-force boundary sampling, plus monotonicity."""
    from .geometry import HullDistance, VPolytope

    rep = SuiteReport(name="metrics-oracle", seed=seed)
    rng = np.random.default_rng(seed)
    pool = body_pool(d, seed)
    npairs = max(1, min(50, nsamples))
    nboundary = 100_000 // max(1, npairs) if nsamples >= 50 else 2000
    for i in range(npairs):
        k = pool[int(rng.integers(len(pool)))]
        body = k.body
        c0 = _interior_point(body, rng)
        s = rng.uniform(0.5, 0.95)
        inner = VPolytope(c0 + s * (body.V - c0))
        exact = hausdorff_inner(body, inner)
        bnd = _sample_boundary(body, nboundary, rng)
        hd = HullDistance(inner.vertices)
        brute = float(np.max(hd.distance_many(bnd)))
        diam = 2.0 * float(np.max(np.linalg.norm(body.V, axis=1)))
        rep.record("hausdorff-brute-agreement",
                   abs(exact - brute) <= 1e-6 * diam)
        # shrinking the inner body cannot decrease the error
        smaller = VPolytope(c0 + 0.8 * s * (body.V - c0))
        rep.record("hausdorff-monotone",
                   hausdorff_inner(body, smaller) >= exact - 1e-12)
    return rep


SUITES = {
    "macbeath-lemmas": suite_macbeath_lemmas,
    "cover-properties": suite_cover_properties,
    "layer-properties": suite_layer_properties,
    "witness-collector": suite_witness_collector,
    "metrics-oracle": suite_metrics_oracle,
}