"""Clustering scores and the K-means baseline."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InputError
from .louvain import ClusterAssignment

EXHAUSTIVE_MAX_K = 8


def _labels(a):
    return np.asarray(a.labels if isinstance(a, ClusterAssignment) else a)


def contingency_table(pred, truth) -> np.ndarray:
    """Counts ``n[i, j]`` of items with predicted cluster i and true cluster j."""
    p, t = _labels(pred), _labels(truth)
    if p.shape != t.shape or p.ndim != 1:
        raise InputError(f"label vectors differ in length: {p.shape} vs {t.shape}")
    _, pi = np.unique(p, return_inverse=True)
    _, ti = np.unique(t, return_inverse=True)
    table = np.zeros((pi.max() + 1 if p.size else 0, ti.max() + 1 if t.size else 0), dtype=int)
    np.add.at(table, (pi, ti), 1)
    return table


def _best_matching(table):
    r, c = table.shape
    if max(r, c) <= EXHAUSTIVE_MAX_K:
        if r <= c:
            return max(sum(table[i, j] for i, j in zip(range(r), perm)) for perm in itertools.permutations(range(c), r))
        return max(sum(table[i, j] for i, j in zip(perm, range(c))) for perm in itertools.permutations(range(r), c))
    rows, cols = linear_sum_assignment(table, maximize=True)
    return int(table[rows, cols].sum())


def accuracy(pred, truth) -> float:
    """Fraction of items correctly clustered under the best one-to-one cluster matching."""
    table = contingency_table(pred, truth)
    n = table.sum()
    if n == 0:
        raise InputError("cannot score empty labelings")
    return _best_matching(table) / n


def _entropy(counts):
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def nmi(pred, truth) -> float:
    """Mutual information normalized by the geometric mean of the two entropies."""
    table = contingency_table(pred, truth)
    n = table.sum()
    if n == 0:
        raise InputError("cannot score empty labelings")
    h_p = _entropy(table.sum(axis=1))
    h_t = _entropy(table.sum(axis=0))
    if h_p == 0 or h_t == 0:
        # identical partitions (both trivial) score 1, otherwise 0
        return 1.0 if h_p == h_t == 0 else 0.0
    pij = table / n
    outer = np.outer(table.sum(axis=1), table.sum(axis=0)) / n**2
    nz = pij > 0
    mi = float((pij[nz] * np.log(pij[nz] / outer[nz])).sum())
    return float(np.clip(mi / np.sqrt(h_p * h_t), 0.0, 1.0))


@dataclass
class KMeansResult:
    assignment: ClusterAssignment
    centers: np.ndarray
    wcss: float
    trace: list = field(default_factory=list)

    @property
    def labels(self):
        return self.assignment.labels


def _kmeanspp(X, k, rng):
    n = X.shape[0]
    centers = [X[rng.integers(n)]]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        idx = rng.choice(n, p=d2 / total) if total > 0 else rng.integers(n)
        centers.append(X[idx])
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    return np.array(centers)


def _lloyd(X, centers, max_iter):
    trace = []
    labels = None
    for _ in range(max_iter):
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new = d2.argmin(axis=1)
        trace.append(float(d2[np.arange(X.shape[0]), new].sum()))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(centers.shape[0]):
            members = X[labels == j]
            if members.size:
                centers[j] = members.mean(axis=0)
    return labels, centers, trace


def kmeans_baseline(vectors, k, seed=0, restarts=10, max_iter=300) -> KMeansResult:
    """Lloyd's algorithm from k-means++ seeds; best of ``restarts`` by within-cluster sum of squares."""
    X = np.asarray(vectors, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise InputError("vectors must share one dimension")
    n = X.shape[0]
    if not 1 <= k <= n:
        raise InputError(f"k={k} must be in [1, {n}]")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(max(1, restarts)):
        labels, centers, trace = _lloyd(X, _kmeanspp(X, k, rng), max_iter)
        if best is None or trace[-1] < best[2][-1]:
            best = (labels, centers, trace)
    labels, centers, trace = best
    return KMeansResult(ClusterAssignment.from_labels(labels), centers, trace[-1], trace)
