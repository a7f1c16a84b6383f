"""Affinely constrained, weighted-l1 sparse coding.

Solves

    min_a ||target - sum_j a_j atom_j||^2 + sum_j pen_j |a_j|   s.t.  sum_j a_j = 1

with monotone accelerated proximal gradient. The proximal operator of the
weighted l1 term restricted to the hyperplane is evaluated exactly: it is a
soft-threshold shifted by the scalar multiplier of the affine constraint, and
that multiplier is found by a breakpoint search.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 5000


class ConvergenceWarning(UserWarning):
    pass


@dataclass
class SparseCodingProblem:
    target: np.ndarray
    atoms: np.ndarray  # one atom per row
    penalties: np.ndarray

    def __post_init__(self):
        self.atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        self.target = np.asarray(self.target, dtype=float).ravel()
        self.penalties = np.asarray(self.penalties, dtype=float).ravel()
        if self.atoms.shape[0] == 0 or self.atoms.size == 0:
            raise InputError("sparse coding needs at least one atom")
        if self.atoms.shape[1] != self.target.size:
            raise InputError(f"atom dimension {self.atoms.shape[1]} != target dimension {self.target.size}")
        if self.penalties.size != self.atoms.shape[0]:
            raise InputError("one penalty per atom is required")
        if np.any(~np.isfinite(self.penalties)) or np.any(self.penalties < 0):
            raise InputError("penalties must be finite and nonnegative")

    @classmethod
    def from_neighbors(cls, target, atoms, sigma_alpha):
        """Penalties ``exp(||atom - target|| / sigma_alpha)``, as used for tangent-space neighborhoods."""
        atoms = np.atleast_2d(np.asarray(atoms, dtype=float))
        target = np.asarray(target, dtype=float).ravel()
        pen = np.exp(np.linalg.norm(atoms - target, axis=1) / sigma_alpha)
        return cls(target, atoms, pen)

    def objective(self, alpha):
        r = self.target - alpha @ self.atoms
        return float(r @ r + self.penalties @ np.abs(alpha))


@dataclass
class SparseCode:
    alpha: np.ndarray
    objective: float
    trace: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = True
    degenerate: bool = False


def prox_affine_l1(v, weights):
    """argmin_a 0.5||a - v||^2 + sum_j w_j |a_j|  subject to  sum_j a_j = 1."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(weights, dtype=float)
    n = v.size

    bps = np.unique(np.concatenate([v - w, v + w]))
    X = v[None, :] - bps[:, None]
    hv = np.sum(np.sign(X) * np.maximum(np.abs(X) - w, 0.0), axis=1)  # nonincreasing in mu
    if hv[0] < 1.0:
        mu = (np.sum(v - w) - 1.0) / n
    elif hv[-1] > 1.0:
        mu = (np.sum(v + w) - 1.0) / n
    else:
        i = int(np.searchsorted(-hv, -1.0, side="left"))
        if hv[i] == 1.0 or i == 0:
            mu = bps[i]
        else:
            lo, hi = bps[i - 1], bps[i]
            f_lo, f_hi = hv[i - 1], hv[i]
            mu = lo + (f_lo - 1.0) * (hi - lo) / (f_lo - f_hi)
    x = v - mu
    a = np.sign(x) * np.maximum(np.abs(x) - w, 0.0)
    # absorb the round-off residual of the constraint into the largest active coordinate
    a[np.argmax(np.abs(a))] += 1.0 - a.sum()
    return a


def solve(problem: SparseCodingProblem, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER) -> SparseCode:
    if tol <= 0:
        raise InputError("tol must be positive")
    A = problem.atoms
    n = A.shape[0]
    if n == 1:
        alpha = np.ones(1)
        return SparseCode(alpha, problem.objective(alpha), [problem.objective(alpha)], 0)

    if not np.any(A):
        alpha = np.full(n, 1.0 / n)
        obj = problem.objective(alpha)
        return SparseCode(alpha, obj, [obj], 0, degenerate=True)

    Q = A @ A.T
    b = A @ problem.target
    c = float(problem.target @ problem.target)
    lam = problem.penalties

    def smooth(a):
        return c - 2.0 * b @ a + a @ Q @ a

    def full(a):
        return float(smooth(a) + lam @ np.abs(a))

    L = 2.0 * np.linalg.eigvalsh(Q)[-1]
    step = 1.0 / L

    x = np.full(n, 1.0 / n)
    fx = full(x)
    trace = [fx]
    y, t_k = x.copy(), 1.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        grad = 2.0 * (Q @ y - b)
        z = prox_affine_l1(y - step * grad, step * lam)
        fz = full(z)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_k * t_k))
        x_prev, f_prev = x, fx
        if fz <= fx:
            x, fx = z, fz
        y = x + (t_k / t_next) * (z - x) + ((t_k - 1.0) / t_next) * (x - x_prev)
        t_k = t_next
        trace.append(fx)
        # fixed-point residual of the plain proximal-gradient map at x
        g_x = 2.0 * (Q @ x - b)
        resid = np.linalg.norm(x - prox_affine_l1(x - step * g_x, step * lam))
        if abs(f_prev - fx) <= tol * max(1.0, abs(fx)) and resid <= np.sqrt(tol):
            converged = True
            break
    if not converged:
        warnings.warn(f"sparse coding did not converge in {max_iter} iterations", ConvergenceWarning, stacklevel=2)
    return SparseCode(x, fx, trace, it, converged)
