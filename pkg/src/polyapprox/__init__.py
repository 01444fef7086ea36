"""Approximation of convex bodies by polytopes of near-optimal complexity.

Core pipeline: canonicalize a body, build a width-based economical cap
cover from packed Macbeath regions, stratify the cover into shrunken
layers, and take the hull of one sample point per placed region. Property
suites check the geometric facts the construction relies on; baselines
(Dudley, Bronshteyn-Ivanov, grid hull) provide complexity comparisons.
"""

from .canonical import AffineMap, CanonicalBody, Ellipsoid, canonicalize, mvee
from .geometry import (
    TAU_GEO,
    TAU_LP,
    Halfspace,
    HPolytope,
    VPolytope,
    contains,
    intersects,
    support,
    volume,
)
from .macbeath import Cap, Constants, MRegion, cap_from_halfspace, cap_of_width, expand_cap, macbeath

__all__ = [
    "AffineMap", "CanonicalBody", "Ellipsoid", "canonicalize", "mvee",
    "TAU_GEO", "TAU_LP", "Halfspace", "HPolytope", "VPolytope",
    "contains", "intersects", "support", "volume",
    "Cap", "Constants", "MRegion", "cap_from_halfspace", "cap_of_width",
    "expand_cap", "macbeath",
]
