"""Riemannian primitives on the Grassmannian Gr(p, n).

Points are ``n x p`` numpy arrays with orthonormal columns; only their column
span matters. Distances use the arc-length metric (l2 norm of principal angles).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CutLocusError, InputError

ORTHO_TOL = 1e-10
HORIZONTAL_TOL = 1e-8
ANGLE_TOL = 1e-6


def check_point(X, tol=ORTHO_TOL):
    """Validate an orthonormal basis and return it as a float array."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] == 0 or X.shape[1] > X.shape[0]:
        raise InputError(f"a Grassmann point must be an n x p matrix with 1 <= p <= n, got shape {X.shape}")
    err = np.abs(X.T @ X - np.eye(X.shape[1])).max()
    if err > tol:
        raise InputError(f"basis columns are not orthonormal (max deviation {err:.2e})")
    return X


def orthonormalize(M):
    """Orthonormal basis of the column span of a full-column-rank matrix."""
    Q, _ = np.linalg.qr(np.asarray(M, dtype=float))
    return Q


def random_point(n, p, rng):
    return orthonormalize(rng.standard_normal((n, p)))


@dataclass(frozen=True)
class TangentVector:
    """Horizontal tangent vector ``delta`` at ``base`` (``base.T @ delta == 0``)."""

    base: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        if self.base.shape != self.delta.shape:
            raise InputError(f"tangent shape {self.delta.shape} does not match base {self.base.shape}")
        err = np.abs(self.base.T @ self.delta).max() if self.delta.size else 0.0
        if err > HORIZONTAL_TOL * max(1.0, np.linalg.norm(self.delta)):
            raise InputError(f"tangent vector is not horizontal (|X^T D| = {err:.2e})")

    @property
    def norm(self):
        return float(np.linalg.norm(self.delta))


def random_tangent(X, rng, scale=1.0):
    Z = rng.standard_normal(X.shape)
    Z -= X @ (X.T @ Z)
    return TangentVector(X, scale * Z / np.linalg.norm(Z))


def _check_pair(X, Y):
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape != Y.shape or X.ndim != 2:
        raise InputError(f"points live on different Grassmannians: {X.shape} vs {Y.shape}")
    return X, Y


def _angles(X, Y, XtY):
    # cosines lose precision for small angles, so those come from sines of the residual
    c = np.linalg.svd(XtY, compute_uv=False)
    sn = np.linalg.svd(Y - X @ XtY, compute_uv=False)[..., ::-1]
    c = np.clip(c, 0.0, 1.0)
    sn = np.clip(sn, 0.0, 1.0)
    return np.where(c * c > 0.5, np.arcsin(sn), np.arccos(c))


def principal_angles(X, Y) -> np.ndarray:
    """Principal angles in ascending order, in [0, pi/2]."""
    X, Y = _check_pair(X, Y)
    return _angles(X, Y, X.T @ Y)


def geodesic_distance(X, Y) -> float:
    return float(np.linalg.norm(principal_angles(X, Y)))


def max_distance(p):
    """Diameter of Gr(p, n) under the arc-length metric."""
    return float(np.sqrt(p) * np.pi / 2)


def pairwise_distances(points) -> np.ndarray:
    """Symmetric matrix of geodesic distances between all points."""
    P = np.stack([np.asarray(x, dtype=float) for x in points])
    n = P.shape[0]
    D = np.zeros((n, n))
    for i in range(n - 1):
        XtY = np.einsum("ab,kac->kbc", P[i], P[i + 1:])
        d = np.linalg.norm(_angles(P[i], P[i + 1:], XtY), axis=1)
        D[i, i + 1:] = d
        D[i + 1:, i] = d
    return D


def log_map(X, Y, angle_tol=ANGLE_TOL) -> TangentVector:
    """Tangent vector at X pointing along the geodesic to Y, with length d(X, Y)."""
    X, Y = _check_pair(X, Y)
    XtY = X.T @ Y
    s = np.linalg.svd(XtY, compute_uv=False)
    if s.min() <= np.cos(np.pi / 2 - angle_tol):
        raise CutLocusError(
            f"principal angle {np.arccos(np.clip(s.min(), 0, 1)):.8f} is within {angle_tol:g} of pi/2"
        )
    # (Y - X X^T Y)(X^T Y)^{-1} via a solve on the transposed system
    H = Y - X @ XtY
    M = np.linalg.solve(XtY.T, H.T).T
    U, S, Vt = np.linalg.svd(M, full_matrices=False)
    delta = (U * np.arctan(S)) @ Vt
    # re-project to remove round-off drift out of the horizontal space
    delta -= X @ (X.T @ delta)
    return TangentVector(X, delta)


def exp_map(X, v: TangentVector) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if v.base.shape != X.shape or not np.array_equal(v.base, X):
        raise InputError("tangent vector is attached to a different base point")
    U, S, Vt = np.linalg.svd(v.delta, full_matrices=False)
    Yraw = (X @ Vt.T) * np.cos(S) @ Vt + (U * np.sin(S)) @ Vt
    return orthonormalize(Yraw)


def flatten(v: TangentVector) -> np.ndarray:
    """Column-major flattening of the tangent matrix."""
    return np.asarray(v.delta).reshape(-1, order="F")
