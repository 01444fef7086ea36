"""Canonical form: sandwich a body between balls B(O, 1/2d) and B(O, 1/2).

The transform comes from a Khachiyan minimum-volume enclosing ellipsoid of
the vertex set. John's theorem gives E/d ⊆ K ⊆ E for the MVEE E, so mapping
E to the ball of radius 1/2 yields exactly the canonical sandwich without
solving the harder maximum-inscribed-ellipsoid program.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceFailure, DegenerateInput
from .geometry import HPolytope, normalize_halfspaces

MVEE_TOL = 1e-7
MVEE_MAX_ITER = 100_000


@dataclass
class Ellipsoid:
    """{z : (z - center)^T shape (z - center) <= 1}, shape SPD."""

    center: np.ndarray
    shape: np.ndarray


@dataclass
class AffineMap:
    """y = matrix @ z + translation."""

    matrix: np.ndarray
    translation: np.ndarray

    def apply(self, points: np.ndarray) -> np.ndarray:
        P = np.asarray(points, dtype=float)
        if P.ndim == 1:
            return self.matrix @ P + self.translation
        return P @ self.matrix.T + self.translation[None, :]

    def inverse(self) -> "AffineMap":
        Minv = np.linalg.inv(self.matrix)
        return AffineMap(Minv, -Minv @ self.translation)

    def compose(self, other: "AffineMap") -> "AffineMap":
        """self ∘ other."""
        return AffineMap(self.matrix @ other.matrix,
                         self.matrix @ other.translation + self.translation)

    def apply_body(self, p: HPolytope) -> HPolytope:
        inv = self.inverse()
        A = p.A @ inv.matrix
        b = p.b - p.A @ inv.translation
        A, b = normalize_halfspaces(A, b)
        V = self.apply(p.V)
        return HPolytope(A, b, vertices=V, normalize=False)


@dataclass
class CanonicalBody:
    """A body in canonical form plus the transform that got it there."""

    body: HPolytope
    to_canonical: AffineMap
    from_canonical: AffineMap
    center: np.ndarray
    r_in: float
    r_out: float
    # smallest singular value of the forward map: an original-space error
    # target eps becomes eps * eps_scale in canonical space (Hausdorff
    # transport is 1/sigma_min under the inverse map)
    eps_scale: float = 1.0
    label: str = ""

    @property
    def dim(self) -> int:
        return self.body.dim


def _khachiyan(P: np.ndarray, tol: float, max_iter: int) -> tuple[np.ndarray, np.ndarray]:
    """Khachiyan iteration with Todd-Yildirim away steps.

    Stops when max_j q_j^T X^-1 q_j <= (d+1)(1+tol), the standard
    (1+tol)-optimality certificate.
    """
    n, d = P.shape
    Q = np.column_stack([P, np.ones(n)])
    u = np.full(n, 1.0 / n)
    target = (d + 1.0) * (1.0 + tol)
    for _ in range(max_iter):
        X = Q.T @ (Q * u[:, None])
        try:
            Xinv = np.linalg.inv(X)
        except np.linalg.LinAlgError:
            raise DegenerateInput("points are not full-dimensional")
        M = np.einsum("ij,jk,ik->i", Q, Xinv, Q)
        j_plus = int(np.argmax(M))
        if M[j_plus] <= target:
            break
        active = u > 1e-12
        m_act = np.where(active, M, np.inf)
        j_minus = int(np.argmin(m_act))
        if (M[j_plus] - d - 1.0) >= (d + 1.0 - m_act[j_minus]):
            j, kappa = j_plus, M[j_plus]
            step = (kappa - d - 1.0) / ((d + 1.0) * (kappa - 1.0))
            u *= 1.0 - step
            u[j] += step
        else:
            j, kappa = j_minus, m_act[j_minus]
            step = (kappa - d - 1.0) / ((d + 1.0) * (kappa - 1.0))
            step = max(step, -u[j] / (1.0 - u[j] + 1e-300))
            u *= 1.0 - step
            u[j] += step
        np.clip(u, 0.0, None, out=u)
        u /= u.sum()
    else:
        raise ConvergenceFailure("MVEE iteration cap reached")
    c = P.T @ u
    cov = P.T @ (P * u[:, None]) - np.outer(c, c)
    A = np.linalg.inv(cov) / d
    return A, c


def mvee(points: np.ndarray, tol: float = MVEE_TOL,
         max_iter: int = MVEE_MAX_ITER) -> Ellipsoid:
    """Minimum-volume enclosing ellipsoid (Khachiyan, active-set wrapper).

    The MVEE is supported on at most d(d+3)/2 points, so the core
    iteration runs on a working subset, adding the worst outside point
    until every input point is enclosed.
    """
    P = np.asarray(points, dtype=float)
    n, d = P.shape
    if n < d + 1:
        raise DegenerateInput("need at least d+1 points")
    if np.linalg.matrix_rank(P - P[0], tol=1e-10) < d:
        raise DegenerateInput("points are not full-dimensional")

    # seed the working set with directional extremes
    rng = np.random.default_rng(0)
    dirs = np.vstack([np.eye(d), -np.eye(d),
                      rng.standard_normal((4 * d * d, d))])
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    work = set(np.argmax(P @ dirs.T, axis=0).tolist())
    A = c = None
    for _ in range(100):
        idx = np.fromiter(work, dtype=np.int64, count=len(work))
        A, c = _khachiyan(P[idx], tol, max_iter)
        vals = np.einsum("ij,jk,ik->i", P - c, A, P - c)
        worst = int(np.argmax(vals))
        if vals[worst] <= 1.0 + 10.0 * tol:
            break
        before = len(work)
        work.update(np.argsort(vals)[-4:].tolist())
        if len(work) == before:
            break
    else:
        raise ConvergenceFailure("MVEE active-set loop did not close")
    # inflate so every input point is inside, exactly
    vals = np.einsum("ij,jk,ik->i", P - c, A, P - c)
    worst = float(np.max(vals))
    if worst > 1.0:
        A = A / worst
    return Ellipsoid(center=c, shape=0.5 * (A + A.T))


def canonicalize(k: HPolytope, label: str = "") -> CanonicalBody:
    """Affinely map a bounded full-dimensional body into canonical form."""
    V = k.V  # raises for unbounded / infeasible inputs
    d = k.dim
    if np.linalg.matrix_rank(V - V[0], tol=1e-10) < d:
        raise DegenerateInput("body is not full-dimensional")

    r_in = float(np.min(k.b))
    r_out = float(np.max(np.linalg.norm(V, axis=1)))
    if r_in >= 1.0 / (2 * d) - 1e-12 and r_out <= 0.5 + 1e-12:
        ident = AffineMap(np.eye(d), np.zeros(d))
        return CanonicalBody(body=k, to_canonical=ident, from_canonical=ident,
                             center=np.zeros(d), r_in=r_in, r_out=r_out,
                             eps_scale=1.0, label=label)

    ell = mvee(V)
    w, Qe = np.linalg.eigh(ell.shape)
    if np.any(w <= 0):
        raise DegenerateInput("MVEE shape matrix not positive definite")
    S = Qe @ np.diag(np.sqrt(w)) @ Qe.T  # shape^(1/2): maps E to the unit ball
    M = 0.5 * S
    T = AffineMap(M, -M @ ell.center)

    body = T.apply_body(k)
    r_out = float(np.max(np.linalg.norm(body.V, axis=1)))
    s = 0.5 / r_out
    if abs(s - 1.0) > 1e-12:
        scale = AffineMap(s * np.eye(d), np.zeros(d))
        T = scale.compose(T)
        body = scale.apply_body(body)
        r_out = 0.5
    r_in = float(np.min(body.b))
    floor = 1.0 / (2 * d)
    if r_in < floor * (1.0 - 1e-5):
        raise ConvergenceFailure(
            f"canonical inner ball {r_in:.3e} below 1/(2d) = {floor:.3e}")
    eps_scale = float(np.min(np.linalg.svd(T.matrix, compute_uv=False)))
    return CanonicalBody(body=body, to_canonical=T, from_canonical=T.inverse(),
                         center=np.zeros(d), r_in=r_in, r_out=r_out,
                         eps_scale=eps_scale, label=label)
