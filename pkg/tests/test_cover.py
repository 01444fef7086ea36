"""Cap-cover construction: disjointness, stabbing, pruning, projections."""

import numpy as np
import pytest

from polyapprox.cover import (
    build_cap_cover,
    dudley_project,
    prune_cover,
    verify_stabbing,
)
from polyapprox.errors import WidthTooLarge
from polyapprox.geometry import gjk_distance, intersects
from polyapprox.macbeath import Constants
from polyapprox.nets import direction_net


@pytest.fixture(scope="module")
def disk_cover(request):
    disk = request.getfixturevalue("disk")
    return build_cap_cover(disk, 0.05, Constants.practical(2))


# make session fixtures visible to module fixture via request
@pytest.fixture(scope="module")
def disk(request):
    from polyapprox.bodies import ball_polytope
    from polyapprox.canonical import canonicalize

    return canonicalize(ball_polytope(2, 0.5, 0.02), label="disk")


def test_direction_net_covering():
    n2 = direction_net(2, np.pi / 4)
    assert len(n2) >= 8
    assert np.allclose(np.linalg.norm(n2, axis=1), 1.0)
    n2c = direction_net(2, np.pi / 2)
    assert len(n2c) >= 4
    net3 = direction_net(3, 0.2)
    rng = np.random.default_rng(0)
    Q = rng.standard_normal((20000, 3))
    Q /= np.linalg.norm(Q, axis=1)[:, None]
    cos_best = np.max(Q @ net3.T, axis=1)
    worst = np.arccos(np.clip(np.min(cos_best), -1, 1))
    assert worst <= 0.2


def test_cover_sizes_and_determinism(disk):
    consts = Constants.practical(2)
    c1 = build_cap_cover(disk, 0.05, consts)
    c2 = build_cap_cover(disk, 0.05, consts)
    assert len(c1) == len(c2)
    assert np.array_equal(c1.centers, c2.centers)
    assert c1.width_param == 0.05
    assert len(c1) > 10


def test_cover_width_gate(disk):
    with pytest.raises(WidthTooLarge):
        build_cap_cover(disk, 0.4, Constants.paper(2))


def test_cover_disjointness_lp(disk_cover):
    cov = disk_cover
    k = len(cov)
    # post-hoc re-check with the public LP predicate on region H-reps
    from polyapprox.geometry import HPolytope
    from polyapprox.macbeath import macbeath

    hreps = [macbeath(cov.body.body, r.x, 0.2).hpolytope()
             for r in cov.regions]
    bad = 0
    for i in range(k):
        for j in range(i + 1, k):
            gap = np.linalg.norm(cov.centers[i] - cov.centers[j])
            if gap > cov.r_circs[i] + cov.r_circs[j] + 1e-9:
                continue
            if intersects(hreps[i], hreps[j]):
                bad += 1
    assert bad == 0


def test_cover_stabbing_and_sandwich(disk, disk_cover):
    rep = verify_stabbing(disk, disk_cover, 0.05, 1000, seed=42,
                          check_sandwich=True)
    assert rep.failures == 0
    assert rep.sandwich_failures == 0
    empty = verify_stabbing(disk, disk_cover, 0.05, 0, seed=1)
    assert empty.samples == 0 and empty.failures == 0


def test_sparse_net_negative_control(disk):
    # a 10x coarser net must leave visible stabbing holes
    consts = Constants.practical(2)
    loose = Constants.practical(2)
    loose.c_net = consts.c_net * 10
    cov = build_cap_cover(disk, 0.05, loose)
    rep = verify_stabbing(disk, cov, 0.05 / loose.beta, 500, seed=42)
    assert rep.failures > 0


def test_prune_cover(disk, disk_cover):
    res = prune_cover(disk_cover)
    assert 1 <= len(res.kept) <= len(disk_cover)
    assert res.ratio >= 1.0
    # pruned projections: pairwise separation at least 0.95 sqrt(w / beta)
    need = 0.95 * np.sqrt(0.05 / disk_cover.beta_eff)
    proj = np.array([
        dudley_project(disk, disk_cover.centers[i], disk_cover.dirs[i])
        for i in res.kept])
    assert np.allclose(np.linalg.norm(proj, axis=1), 2.0, atol=1e-9)
    for i in range(len(proj)):
        d = np.linalg.norm(proj[i + 1:] - proj[i][None, :], axis=1)
        assert np.all(d >= need)


def test_prune_single_region_unchanged(disk):
    consts = Constants.practical(2)
    cov = build_cap_cover(disk, 0.05, consts, max_regions=1)
    res = prune_cover(cov)
    assert res.kept == [0]


def test_dudley_project_basics():
    from polyapprox.bodies import ball_polytope
    from polyapprox.canonical import canonicalize

    disk = canonicalize(ball_polytope(2, 0.5, 0.05))
    p = dudley_project(disk, np.zeros(2), np.array([0.0, 1.0]))
    assert p == pytest.approx([0.0, 2.0])
    p2 = dudley_project(disk, np.array([0.3, 0.0]), np.array([1.0, 0.0]))
    assert p2 == pytest.approx([2.0, 0.0])


def test_cover_json_roundtrip(disk_cover):
    js = disk_cover.to_json()
    assert js["width_param"] == 0.05
    assert len(js["caps"]) == len(disk_cover)
    assert len(js["regions"][0]["vertices"][0]) == 2
