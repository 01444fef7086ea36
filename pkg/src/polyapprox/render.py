"""Static figure output: SVG overlays for d=2, OFF meshes for d=3."""

from __future__ import annotations

import numpy as np

from .lattice import FaceLattice


def _svg_path(points: np.ndarray, scale: float, closed: bool = True) -> str:
    cmds = []
    for i, (x, y) in enumerate(points):
        cmds.append(f"{'M' if i == 0 else 'L'}{x * scale:.2f},{-y * scale:.2f}")
    if closed:
        cmds.append("Z")
    return " ".join(cmds)


def svg_overlay(path: str, sc, hull_pts: np.ndarray | None = None) -> None:
    """d=2 overlay figure: body, shrunken layers, cap bases, regions,
    samples and the approximating hull."""
    body = sc.body.body
    if body.dim != 2:
        raise ValueError("SVG overlay is d=2 only")
    S = 400.0
    parts = ['<?xml version="1.0" encoding="UTF-8"?>',
             '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
             'viewBox="-260 -260 520 520">']
    parts.append(f'<path d="{_svg_path(body.V, S)}" fill="#f4f4f8" '
                 'stroke="#40404a" stroke-width="1.2"/>')
    for j in range(1, sc.t + 1):
        parts.append(f'<path d="{_svg_path(body.V * sc.gamma ** j, S)}" '
                     'fill="none" stroke="#9fb4cc" stroke-width="0.6" '
                     'stroke-dasharray="4,3"/>')
    for i, reg in enumerate(sc.cover.regions):
        g = sc.gamma ** int(sc.group_of[i])
        ring = reg.verts * g
        c = ring.mean(axis=0)
        ang = np.arctan2(ring[:, 1] - c[1], ring[:, 0] - c[0])
        ring = ring[np.argsort(ang)]
        parts.append(f'<path d="{_svg_path(ring, S)}" fill="#d86a5a" '
                     'fill-opacity="0.45" stroke="none"/>')
        cap_ring = reg.verts  # cap base chord markers at original scale
    for i, reg in enumerate(sc.cover.regions):
        u = reg.u
        c = reg.base_offset
        t1 = np.array([-u[1], u[0]])
        mid = reg.x
        a0, a1 = mid - 0.02 * t1, mid + 0.02 * t1
        parts.append(f'<path d="{_svg_path(np.vstack([a0, a1]), S, False)}" '
                     'stroke="#b0b6c0" stroke-width="0.4" fill="none"/>')
    if hull_pts is not None and len(hull_pts) >= 3:
        c = hull_pts.mean(axis=0)
        ang = np.arctan2(hull_pts[:, 1] - c[1], hull_pts[:, 0] - c[0])
        ordered = hull_pts[np.argsort(ang)]
        parts.append(f'<path d="{_svg_path(ordered, S)}" fill="none" '
                     'stroke="#2a6a3c" stroke-width="1.4"/>')
    for s in sc.samples:
        parts.append(f'<circle cx="{s[0] * S:.2f}" cy="{-s[1] * S:.2f}" '
                     'r="1.6" fill="#20401f"/>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))


def off_mesh(path: str, vertices: np.ndarray, lattice: FaceLattice) -> None:
    """d=3 OFF mesh of a polytope with merged facets."""
    if lattice.dim != 3:
        raise ValueError("OFF output is d=3 only")
    facets = lattice.faces[2]
    V = lattice.vertex_points if lattice.vertex_points is not None else vertices
    lines = ["OFF", f"{len(V)} {len(facets)} {len(lattice.faces[1])}"]
    for v in V:
        lines.append(" ".join(f"{c:.12g}" for c in v))
    center = V.mean(axis=0)
    for f in facets:
        pts = V[list(f)]
        n = np.cross(pts[1] - pts[0], pts[2] - pts[0])
        if n @ (pts.mean(axis=0) - center) < 0:
            n = -n
        nn = np.linalg.norm(n)
        if nn > 0:
            n = n / nn
        # order facet vertices by angle about the outward normal
        e = pts - pts.mean(axis=0)
        t1 = e[0] / max(np.linalg.norm(e[0]), 1e-300)
        t2 = np.cross(n, t1)
        ang = np.arctan2(e @ t2, e @ t1)
        order = np.argsort(ang)
        lines.append(str(len(f)) + " " + " ".join(str(f[o]) for o in order))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")