"""Deterministic direction nets on the unit sphere."""

from __future__ import annotations

import numpy as np

from .errors import ValidationError

# Fibonacci-lattice covering radius is ~2.7/sqrt(n) (measured); 2.9 leaves margin.
FIB_COVER_CONST = 2.9


def circle_net(n: int) -> np.ndarray:
    ang = 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([np.cos(ang), np.sin(ang)])


def fibonacci_sphere(n: int) -> np.ndarray:
    i = np.arange(n)
    golden = (1.0 + 5.0 ** 0.5) / 2.0
    z = 1.0 - (2.0 * i + 1.0) / n
    theta = 2.0 * np.pi * i / golden
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.column_stack([r * np.cos(theta), r * np.sin(theta), z])


def direction_net(d: int, theta: float) -> np.ndarray:
    """Unit-vector net with covering radius <= theta, in deterministic order.

    d=2 uses equally spaced angles, d=3 a Fibonacci lattice, d>=4 a seeded
    Gaussian sample sized for the same asymptotic density (best effort).
    """
    if not 0.0 < theta <= np.pi / 2:
        raise ValidationError("net spacing must lie in (0, pi/2]")
    if d == 2:
        n = max(4, int(np.ceil(2.0 * np.pi / theta)))
        return circle_net(n)
    if d == 3:
        n = max(32, int(np.ceil((FIB_COVER_CONST / theta) ** 2)))
        return fibonacci_sphere(n)
    rng = np.random.default_rng(123456789 + 1000 * d)
    n = max(64, int(np.ceil((2.9 / theta) ** (d - 1))))
    U = rng.standard_normal((n, d))
    return U / np.linalg.norm(U, axis=1)[:, None]


def net_size(d: int, theta: float) -> int:
    """Size the net would have, without materializing it."""
    if d == 2:
        return max(4, int(np.ceil(2.0 * np.pi / theta)))
    if d == 3:
        return max(32, int(np.ceil((FIB_COVER_CONST / theta) ** 2)))
    return max(64, int(np.ceil((2.9 / theta) ** (d - 1))))
