"""Weighted modularity and the two-phase Louvain method on dense affinity matrices."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDataError, InputError

GAIN_TOL = 1e-9


@dataclass(frozen=True)
class ClusterAssignment:
    labels: np.ndarray
    k: int

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or (labels.size and not np.issubdtype(labels.dtype, np.integer)):
            raise InputError("labels must be a 1-d integer array")
        if labels.size and (labels.min() < 0 or labels.max() >= self.k):
            raise InputError(f"labels must lie in [0, {self.k})")
        if np.unique(labels).size != self.k:
            raise InputError("every label in [0, k) must be used")

    @classmethod
    def from_labels(cls, labels):
        """Relabel arbitrary hashable labels to 0..k-1 in order of first appearance."""
        labels = list(np.asarray(labels).tolist())
        mapping = {}
        out = np.empty(len(labels), dtype=int)
        for i, lab in enumerate(labels):
            out[i] = mapping.setdefault(lab, len(mapping))
        return cls(out, len(mapping))

    def __len__(self):
        return int(np.asarray(self.labels).size)

    def clusters(self):
        return [np.flatnonzero(self.labels == c) for c in range(self.k)]


def check_graph(W) -> np.ndarray:
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise InputError(f"affinity matrix must be square, got {W.shape}")
    if not np.all(np.isfinite(W)):
        raise InputError("affinity matrix has non-finite entries")
    if np.any(W < 0):
        raise InputError("affinity matrix has negative weights")
    if W.size and np.abs(W - W.T).max() > 1e-12 * max(1.0, np.abs(W).max()):
        raise InputError("affinity matrix is not symmetric")
    return W


def _labels_array(a):
    return np.asarray(a.labels if isinstance(a, ClusterAssignment) else a)


def modularity(W, assignment, resolution=1.0) -> float:
    """Newman's weighted modularity ``(1/2m) sum_ij (w_ij - res*k_i k_j/2m) [c_i == c_j]``."""
    W = np.asarray(W, dtype=float)
    labels = _labels_array(assignment)
    if labels.size != W.shape[0]:
        raise InputError("assignment length does not match the graph")
    two_m = W.sum()
    if two_m <= 0:
        raise DegenerateDataError("graph has no edges (total weight 0)")
    _, inv = np.unique(labels, return_inverse=True)
    deg = W.sum(axis=1)
    n_c = inv.max() + 1
    P = np.zeros((labels.size, n_c))
    P[np.arange(labels.size), inv] = 1.0
    internal = np.trace(P.T @ W @ P)
    tot = P.T @ deg
    return float(internal / two_m - resolution * np.sum(tot**2) / two_m**2)


def _local_moving(A, resolution, rng):
    n = A.shape[0]
    deg = A.sum(axis=1)
    two_m = deg.sum()
    comm = np.arange(n)
    tot = deg.copy()
    order = rng.permutation(n)
    pos = np.empty(n, dtype=int)
    pos[order] = np.arange(n)
    moved_any = False
    improved = True
    while improved:
        improved = False
        for i in order:
            d = comm[i]
            row = A[i].copy()
            row[i] = 0.0
            tot[d] -= deg[i]
            k_ic = np.bincount(comm, weights=row, minlength=n)
            nbrs = np.flatnonzero(row > 0)
            cands = np.unique(np.append(comm[nbrs], d))
            gains = k_ic[cands] - resolution * tot[cands] * deg[i] / two_m
            # scan order: community of the earliest neighbour in the shuffled order; own community first
            key = np.full(cands.size, n + 1)
            np.minimum.at(key, np.searchsorted(cands, comm[nbrs]), pos[nbrs])
            key[np.searchsorted(cands, d)] = -1
            best_gain = gains.max()
            best = cands[np.lexsort((key, ~(gains >= best_gain)))[0]]
            stay_gain = gains[np.searchsorted(cands, d)]
            if best != d and (best_gain - stay_gain) / (two_m / 2) > GAIN_TOL:
                comm[i] = best
                improved = True
                moved_any = True
            else:
                best = d
            tot[best] += deg[i]
    return comm, moved_any


@dataclass
class LouvainResult:
    assignment: ClusterAssignment
    modularity: float
    trace: list = field(default_factory=list)
    levels: list = field(default_factory=list)

    @property
    def labels(self):
        return self.assignment.labels

    @property
    def k(self):
        return self.assignment.k


def louvain(W, resolution=1.0, seed=0) -> LouvainResult:
    """Louvain community detection; deterministic for a fixed seed."""
    W = check_graph(W)
    if resolution <= 0:
        raise InputError("resolution must be positive")
    if W.sum() <= 0:
        raise DegenerateDataError("graph has no edges (total weight 0)")
    rng = np.random.default_rng(seed)
    n = W.shape[0]
    node_comm = np.arange(n)
    A = W.copy()
    q = modularity(W, node_comm, resolution)
    trace = [q]
    levels = []
    while True:
        comm, moved = _local_moving(A, resolution, rng)
        if not moved:
            break
        _, comm = np.unique(comm, return_inverse=True)
        candidate = comm[node_comm]
        q_new = modularity(W, candidate, resolution)
        if q_new - q <= GAIN_TOL:
            break
        node_comm, q = candidate, q_new
        trace.append(q)
        levels.append(ClusterAssignment.from_labels(node_comm))
        k = comm.max() + 1
        P = np.zeros((A.shape[0], k))
        P[np.arange(A.shape[0]), comm] = 1.0
        A = P.T @ A @ P
        if k == 1:
            break
    final = ClusterAssignment.from_labels(node_comm)
    return LouvainResult(final, q, trace, levels)
