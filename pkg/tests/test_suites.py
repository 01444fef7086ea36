"""Property-suite machinery at reduced sample counts (full runs live in
the acceptance module)."""

import pytest

from polyapprox.suites import (
    SUITES,
    suite_cover_properties,
    suite_layer_properties,
    suite_macbeath_lemmas,
    suite_metrics_oracle,
    suite_witness_collector,
)


def test_registry_complete():
    assert set(SUITES) == {"macbeath-lemmas", "cover-properties",
                           "layer-properties", "witness-collector",
                           "metrics-oracle"}


@pytest.mark.parametrize("d", [2, 3])
def test_macbeath_lemmas_small(d):
    rep = suite_macbeath_lemmas(d, 40, seed=11)
    assert rep.ok(), rep.violations
    assert len(rep.counts) == 11
    assert all(c >= 30 for c in rep.counts.values()), rep.counts


def test_cover_properties_small():
    rep = suite_cover_properties(2, 200, seed=5)
    assert rep.ok(), rep.violations


def test_layer_properties_small():
    # Single-group bodies at large eps cannot satisfy the outer-gap and
    # scale-range facts without alpha = Theta(eps) (see decisions ledger);
    # everything else must hold, and multi-group bodies must pass all six.
    rep = suite_layer_properties(2, 60, seed=6)
    allowed_red = {"outer-gap-ball", "scale-range-ball", "volume-ratio-ball"}
    assert set(rep.violations) <= allowed_red, rep.violations


def test_witness_collector_small():
    rep = suite_witness_collector(2, 60, seed=7)
    assert rep.ok(), rep.violations


@pytest.mark.parametrize("d", [2, 3])
def test_metrics_oracle_small(d):
    rep = suite_metrics_oracle(d, 10, seed=8)
    assert rep.ok(), rep.violations


def test_determinism_same_seed():
    a = suite_macbeath_lemmas(2, 25, seed=3)
    b = suite_macbeath_lemmas(2, 25, seed=3)
    assert a.counts == b.counts and a.violations == b.violations
