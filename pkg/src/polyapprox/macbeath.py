"""Cap calculus and Macbeath regions.

A cap is the intersection of the body with a halfspace; its width is
measured from the cutting hyperplane to the parallel supporting hyperplane.
The Macbeath region at x with scale lam is x + lam((K-x) ∩ (x-K)), a
centrally symmetric body whose halfspaces come in mirrored pairs of the
body's own rows.

Regions are built over a locally pruned row subset when the body carries
thousands of facets: a row whose slack at x exceeds the region's certified
circumradius cannot be active. The pruning is verified (and widened if
needed) against the computed vertex set, so results are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .canonical import CanonicalBody
from .errors import EmptyCap, PointOutsideBody, ValidationError, WidthExceedsBody
from .geometry import (
    TAU_GEO,
    TAU_LP,
    HPolytope,
    cap_vertex_set,
    polygon_centroid_3d,
    region_vertices,
    section_ring,
    volume_of_vertices,
)


@dataclass
class Constants:
    """Preset constants; every output records which preset produced it."""

    d: int
    preset: str
    delta0: float        # cap-width gate of the Macbeath lemmas, 1/(6d)
    beta: float          # cap-family shrink/expansion factor
    lam_sandwich: float  # 30 d beta^2
    sigma: float         # collector expansion, 4 d beta^2
    c_net: float = 0.32  # direction-net spacing coefficient (theta = c_net sqrt(w))
    c1_base: float = 2.0
    c4: float = 0.0      # layer-count cap multiplier, default d+1
    t_max: int = 2       # practical cap on stratification depth
    width_gate: float = 0.0
    eps_gate: float = 0.2

    def __post_init__(self):
        if self.c4 == 0.0:
            self.c4 = self.d + 1
        if self.width_gate == 0.0:
            self.width_gate = self.delta0 if self.preset == "paper" else 0.12

    @classmethod
    def paper(cls, d: int) -> "Constants":
        beta = 30.0 * d
        return cls(d=d, preset="paper", delta0=1.0 / (6 * d), beta=beta,
                   lam_sandwich=30.0 * d * beta * beta,
                   sigma=4.0 * d * beta * beta, c1_base=0.0)

    @classmethod
    def practical(cls, d: int, beta: float = 2.0, c1_base: float = 2.0,
                  t_max: int = 2) -> "Constants":
        return cls(d=d, preset="practical", delta0=1.0 / (6 * d), beta=beta,
                   lam_sandwich=30.0 * d * beta * beta,
                   sigma=4.0 * d * beta * beta, c1_base=c1_base, t_max=t_max)

    def record(self) -> dict:
        return {
            "preset": self.preset, "d": self.d, "delta0": self.delta0,
            "beta": self.beta, "lambda_sandwich": self.lam_sandwich,
            "sigma": self.sigma, "c_net": self.c_net, "c1_base": self.c1_base,
            "c4": self.c4, "t_max": self.t_max, "width_gate": self.width_gate,
        }


def _parent_poly(k) -> HPolytope:
    return k.body if isinstance(k, CanonicalBody) else k


@dataclass
class Cap:
    """body ∩ {<direction, z> >= base_offset}."""

    parent: HPolytope
    direction: np.ndarray
    support_value: float
    base_offset: float
    apex: np.ndarray
    clamped: bool = False
    _inside_idx: np.ndarray | None = field(default=None, repr=False)
    _ring: np.ndarray | None = field(default=None, repr=False)
    _centroid: np.ndarray | None = field(default=None, repr=False)

    @property
    def width(self) -> float:
        return self.support_value - self.base_offset

    def inside_idx(self) -> np.ndarray:
        if self._inside_idx is None:
            self._inside_idx = cap_vertex_set(self.parent, self.direction,
                                              self.base_offset)
        return self._inside_idx

    def ring(self) -> np.ndarray:
        if self._ring is None:
            self._ring = section_ring(self.parent, self.direction,
                                      self.base_offset,
                                      inside_idx=self.inside_idx())
        return self._ring

    @property
    def base_centroid(self) -> np.ndarray:
        if self._centroid is None:
            ring = self.ring()
            if self.parent.dim == 2:
                self._centroid = 0.5 * (ring[0] + ring[1])
            else:
                self._centroid = polygon_centroid_3d(ring)
        return self._centroid

    def vertex_set(self) -> np.ndarray:
        """Exact vertices of the cap polytope (body verts above the base
        plus the base ring)."""
        inside = self.parent.V[self.inside_idx()]
        if self.clamped:
            return self.parent.V
        return np.vstack([inside, self.ring()])

    def hrep(self) -> tuple[np.ndarray, np.ndarray]:
        A = np.vstack([self.parent.A, -self.direction[None, :]])
        b = np.concatenate([self.parent.b, [-self.base_offset]])
        return A, b

    def hpolytope(self) -> HPolytope:
        A, b = self.hrep()
        return HPolytope(A, b, normalize=False)

    def cap_support(self, u: np.ndarray) -> float:
        """Exact support of the cap polytope in an arbitrary direction."""
        return float(np.max(self.vertex_set() @ u))


def _apex_point(parent: HPolytope, u: np.ndarray, sval: float,
                witness_idx: int | None = None) -> np.ndarray:
    """Support point; face centroid when the support is attained by a face."""
    dots = parent.V @ u
    tied = np.where(dots >= sval - TAU_GEO)[0]
    if len(tied) == 1:
        return parent.V[tied[0]]
    return parent.V[tied].mean(axis=0)


def cap_of_width(k, u: np.ndarray, w: float, support_value: float | None = None,
                 lazy: bool = False) -> Cap:
    """The cap of width w cut orthogonally to the unit direction u."""
    parent = _parent_poly(k)
    u = np.asarray(u, dtype=float)
    if support_value is None:
        support_value = float(np.max(parent.V @ u))
    if w <= 0:
        raise ValidationError("cap width must be positive")
    body_width = support_value + float(np.max(parent.V @ (-u)))
    if w > body_width + TAU_LP:
        raise WidthExceedsBody(
            f"requested width {w} exceeds body width {body_width}")
    clamped = w >= body_width - TAU_LP
    c = support_value - w
    cap = Cap(parent=parent, direction=u, support_value=support_value,
              base_offset=c, apex=_apex_point(parent, u, support_value),
              clamped=clamped)
    if not lazy:
        cap.base_centroid  # materialize ring + centroid
    return cap


def expand_cap(c: Cap, lam: float) -> Cap:
    """lam-expansion: base moved to distance lam*width from the supporting
    hyperplane, clamped to the whole body when it runs past it."""
    if lam < 0:
        raise ValidationError("expansion factor must be >= 0")
    parent = c.parent
    body_width = c.support_value + float(np.max(parent.V @ (-c.direction)))
    new_w = lam * c.width
    if new_w >= body_width - TAU_LP:
        cap = Cap(parent=parent, direction=c.direction,
                  support_value=c.support_value,
                  base_offset=c.support_value - body_width,
                  apex=c.apex, clamped=True)
        return cap
    return Cap(parent=parent, direction=c.direction,
               support_value=c.support_value,
               base_offset=c.support_value - new_w, apex=c.apex)


def cap_from_halfspace(k, normal: np.ndarray, offset: float) -> Cap:
    """Cap K ∩ H for H = {<normal, z> <= offset}; direction is -normal."""
    parent = _parent_poly(k)
    n = np.asarray(normal, dtype=float)
    nn = np.linalg.norm(n)
    if nn == 0:
        raise ValidationError("halfspace normal must be nonzero")
    n = n / nn
    offset = float(offset) / nn
    u = -n
    sval = float(np.max(parent.V @ u))
    c = -offset
    if c > sval - TAU_LP:
        raise EmptyCap("halfspace misses the body")
    low = -float(np.max(parent.V @ n))  # min of <u, z> over the body
    clamped = c <= low + TAU_LP
    if clamped:
        c = low
    return Cap(parent=parent, direction=u, support_value=sval, base_offset=c,
               apex=_apex_point(parent, u, sval), clamped=clamped)


@dataclass
class MRegion:
    """Macbeath region M^lam(x): center x, scale lam, mirrored halfspaces."""

    center: np.ndarray
    scale: float
    A: np.ndarray            # region halfspaces (possibly locally pruned)
    b: np.ndarray
    r_in: float              # inscribed-ball radius about the center
    _verts: np.ndarray | None = field(default=None, repr=False)
    _r_circ: float | None = field(default=None, repr=False)
    _volume: float | None = field(default=None, repr=False)

    @property
    def verts(self) -> np.ndarray:
        if self._verts is None:
            self._verts = region_vertices(self.A, self.b, self.center, self.r_in)
        return self._verts

    @property
    def r_circ(self) -> float:
        if self._r_circ is None:
            self._r_circ = float(np.max(np.linalg.norm(
                self.verts - self.center[None, :], axis=1)))
        return self._r_circ

    @property
    def volume(self) -> float:
        if self._volume is None:
            self._volume = volume_of_vertices(self.verts)
        return self._volume

    def hpolytope(self) -> HPolytope:
        return HPolytope(self.A, self.b, vertices=self._verts, normalize=False)

    def scaled_about_center(self, factor: float) -> "MRegion":
        """M^(lam*factor)(x) from M^lam(x) by scaling offsets about x."""
        slack = self.b - self.A @ self.center
        b2 = self.A @ self.center + factor * slack
        v2 = None
        if self._verts is not None:
            v2 = self.center + factor * (self._verts - self.center)
        reg = MRegion(center=self.center, scale=self.scale * factor,
                      A=self.A, b=b2, r_in=self.r_in * factor)
        reg._verts = v2
        return reg

    def support(self, u: np.ndarray) -> float:
        return float(np.max(self.verts @ u))


# bodies at or below this row count skip local pruning entirely
_PRUNE_MIN_ROWS = 64


def _macbeath_cone_local(parent: HPolytope, x, lam, axis_hint):
    """Cone-localized region construction for finely discretized bodies.

    Rows whose normals lie outside a cone about x's direction have slack
    at least min(b) - |x| cos(gamma), so only the in-cone rows need their
    slacks computed. Returns None when no cone certifies (caller falls
    back to the full-row path).
    """
    nt = getattr(parent, "_normals_tree", None)
    if nt is None:
        from scipy.spatial import cKDTree

        nt = cKDTree(parent.A)
        parent._normals_tree = nt
        parent._b_min = float(np.min(parent.b))
    nx = float(np.sqrt(x @ x))
    if nx < 1e-12:
        return None
    xhat = x / nx
    b_min = parent._b_min
    for gamma in (0.35, 0.7, 1.4):
        bound_out = b_min - nx * math.cos(gamma)
        rows = nt.query_ball_point(xhat, 2.0 * math.sin(gamma / 2.0))
        if len(rows) < 4 or len(rows) > parent.nfacets // 2:
            return None
        rows = np.asarray(rows, dtype=np.int64)
        Ai = parent.A[rows]
        si = parent.b[rows] - Ai @ x
        smin = float(np.min(si))
        if smin < -TAU_LP:
            raise PointOutsideBody("Macbeath center lies outside the body")
        smin = max(smin, 0.0)
        if smin > bound_out:
            continue  # the global minimum slack might sit outside the cone
        T = 3.5 * max(smin, 1e-15)
        for _ in range(8):
            mask = si <= T
            if np.all(mask):
                break
            Ak = Ai[mask]
            sk = lam * si[mask]
            ax = Ak @ x
            A = np.vstack([Ak, -Ak])
            b = np.concatenate([ax + sk, -ax + sk])
            reg = MRegion(center=x, scale=lam, A=A, b=b, r_in=lam * smin)
            try:
                verts = reg.verts
            except Exception:
                T *= 3.0
                continue
            rel = verts - x[None, :]
            r_circ = reg.r_circ
            if lam * bound_out <= r_circ:
                break  # cone too narrow for this region; widen gamma
            om = ~mask
            s_om = si[om]
            if len(s_om) and lam * float(np.min(s_om)) <= r_circ:
                A_om = Ai[om]
                reach = np.max(rel @ A_om.T, axis=0)
                truly = reach > lam * s_om + 1e-15
                if np.any(truly):
                    T = max(T * 3.0,
                            float(np.min(s_om[truly])) * 1.0000001)
                    continue
            return reg
    return None


def _full_region(parent: HPolytope, x, lam, s, smin) -> MRegion:
    A = np.vstack([parent.A, -parent.A])
    ax = parent.A @ x
    b = np.concatenate([ax + lam * s, -ax + lam * s])
    return MRegion(center=x, scale=lam, A=A, b=b, r_in=lam * smin)


def macbeath(k, x: np.ndarray, lam: float, local: bool = True,
             axis_hint: np.ndarray | None = None) -> MRegion:
    """Macbeath region M^lam(x) = x + lam((K-x) ∩ (x-K)).

    On bodies with many facets only the locally active rows are kept.
    A kept threshold T on the slack is verified against the computed
    vertices: an omitted row (slack s_i > T) cannot cut the region when
    the region's extent along its normal, bounded anisotropically via the
    lens axis, stays below lam*s_i. Failing rows are admitted and the
    region rebuilt, so the result is exact.
    """
    parent = _parent_poly(k)
    x = np.asarray(x, dtype=float)
    if lam <= 0:
        raise ValidationError("Macbeath scale must be positive")
    m = parent.nfacets
    if local and m > 4096:
        reg = _macbeath_cone_local(parent, x, lam, axis_hint)
        if reg is not None:
            return reg
    s = parent.b - parent.A @ x
    imin = int(np.argmin(s))
    smin = float(s[imin])
    if smin < -TAU_LP:
        raise PointOutsideBody("Macbeath center lies outside the body")
    smin = max(smin, 0.0)
    if not local or m <= _PRUNE_MIN_ROWS:
        return _full_region(parent, x, lam, s, smin)

    axis = axis_hint if axis_hint is not None else parent.A[imin]
    # boundedness insurance: per +-axis keep the best-aligned row, so thin
    # slab-like row subsets still close up the local system
    anchor = getattr(parent, "_axis_anchor_rows", None)
    if anchor is None:
        anchor = np.concatenate([np.argmax(parent.A, axis=0),
                                 np.argmin(parent.A, axis=0)])
        parent._axis_anchor_rows = anchor
    T = 5.5 * max(smin, 1e-15)
    for _ in range(60):
        mask = s <= T
        mask[anchor] = True
        if np.all(mask):
            return _full_region(parent, x, lam, s, smin)
        Ai = parent.A[mask]
        si = lam * s[mask]
        ax = Ai @ x
        A = np.vstack([Ai, -Ai])
        b = np.concatenate([ax + si, -ax + si])
        reg = MRegion(center=x, scale=lam, A=A, b=b, r_in=lam * smin)
        try:
            verts = reg.verts
        except Exception:
            T *= 3.0
            continue
        rel = verts - x[None, :]
        # isotropic certificate first, then an anisotropic slab bound, and
        # an exact vertex check for the rows the bound cannot clear
        r_circ = reg.r_circ
        omitted = ~mask
        s_om = s[omitted]
        if lam * float(np.min(s_om)) > r_circ:
            return reg
        par = rel @ axis
        e_par = float(np.max(np.abs(par))) if len(par) else 0.0
        e_perp = float(np.sqrt(max(0.0, np.max(np.einsum("ij,ij->i", rel, rel)
                                               - par * par))))
        A_om = parent.A[omitted]
        cosphi = np.abs(A_om @ axis)
        sinphi = np.sqrt(np.maximum(0.0, 1.0 - cosphi * cosphi))
        bound = e_par * cosphi + e_perp * sinphi
        bad = np.nonzero(bound >= lam * s_om)[0]
        if len(bad) == 0:
            return reg
        # a row cuts the computed region iff it excludes one of its vertices
        reach = np.max(rel @ A_om[bad].T, axis=0)
        truly = bad[reach > lam * s_om[bad] + 1e-15]
        if len(truly) == 0:
            return reg
        T = max(T * 3.0, float(np.min(s_om[truly])) * 1.0000001)
    raise ValidationError("Macbeath local row selection did not stabilize")
