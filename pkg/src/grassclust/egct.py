"""Geodesic clustering by tangent spaces with Louvain (eGCT).

Each feature is compared with its nearest neighbours on the Grassmannian in
its own tangent space: sparse affine coding weights capture how well the
neighbours reconstruct the point, and the angle between each neighbour's
tangent and the local PCA subspace captures whether it lies on the same
submanifold. Both feed an affinity graph partitioned by Louvain.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import grassmann as gm
from .errors import ConfigError, CutLocusError, DegenerateDataError, InputError
from .louvain import ClusterAssignment, LouvainResult, louvain
from .sparse_coding import ConvergenceWarning, SparseCodingProblem, solve

IDENTICAL_TOL = 1e-10


class DegenerateNeighborhoodError(DegenerateDataError):
    pass


@dataclass(frozen=True)
class EgctParams:
    k_nn: int = 10
    sigma_alpha: float = 1.0
    sigma_theta: float = 1.0
    pca_energy: float = 0.9
    louvain_resolution: float = 1.0
    seed: int = 0
    sc_tol: float = 1e-8
    sc_max_iter: int = 5000

    def __post_init__(self):
        if not isinstance(self.k_nn, (int, np.integer)) or self.k_nn < 2:
            raise ConfigError(f"k_nn must be an integer >= 2, got {self.k_nn!r}")
        for name in ("sigma_alpha", "sigma_theta", "louvain_resolution"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if not 0 < self.pca_energy <= 1:
            raise ConfigError("pca_energy must be in (0, 1]")

    def check_count(self, n):
        if self.k_nn >= n:
            raise InputError(f"k_nn={self.k_nn} needs at least {self.k_nn + 1} features, got {n}")


def _ranking_distances(features, angle_tol=gm.ANGLE_TOL):
    """Pairwise geodesic distances, with cut-locus pairs pushed to the diameter."""
    P = np.stack([np.asarray(x) for x in features])
    n, _, p = P.shape
    D = np.zeros((n, n))
    for i in range(n):
        XtY = np.einsum("ab,kac->kbc", P[i], P)
        s = np.linalg.svd(XtY, compute_uv=False)
        D[i] = np.linalg.norm(gm._angles(P[i], P, XtY), axis=1)
        cut = s[:, -1] <= np.sin(angle_tol)
        cut[i] = False
        D[i, cut] = gm.max_distance(p)
    D = np.minimum(D, D.T)  # exact symmetry
    np.fill_diagonal(D, 0.0)
    return D


def knn(features, i, k_nn, distances=None) -> np.ndarray:
    """Indices of the k_nn features closest to feature i (ties go to the lower index)."""
    n = len(features)
    if k_nn >= n:
        raise InputError(f"need at least {k_nn + 1} features for {k_nn} neighbours, got {n}")
    if distances is None:
        x = features[i]
        d = np.array([
            gm.max_distance(x.shape[1]) if j != i and _at_cut_locus(x, features[j]) else gm.geodesic_distance(x, features[j])
            for j in range(n)
        ])
    else:
        d = np.asarray(distances[i], dtype=float)
    others = np.array([j for j in range(n) if j != i])
    order = np.lexsort((others, d[others]))
    return others[order[:k_nn]]


def _at_cut_locus(X, Y, angle_tol=gm.ANGLE_TOL):
    return gm.principal_angles(X, Y)[-1] >= np.pi / 2 - angle_tol


@dataclass
class NeighborhoodStats:
    index: int
    neighbor_ids: np.ndarray
    tangents: np.ndarray  # flattened tangent vectors, one row per neighbour
    alpha: np.ndarray
    theta: np.ndarray
    cov: np.ndarray
    subspace: np.ndarray  # orthonormal columns spanning the PCA eigenspace
    dropped: list = field(default_factory=list)
    alpha_degenerate: bool = False
    alpha_converged: bool = True


def _pca_subspace(X, energy):
    n = X.shape[0]
    centered = X - X.mean(axis=0)
    cov = centered.T @ centered / (n - 1)
    _, s, Vt = np.linalg.svd(centered, full_matrices=False)
    ev = s**2
    total = ev.sum()
    if total <= 0:
        dim = 1
    else:
        dim = int(np.searchsorted(np.cumsum(ev) / total, energy - 1e-12) + 1)
        dim = min(max(dim, 1), Vt.shape[0])
    return cov, Vt[:dim].T


def angle_to_subspace(v, S):
    """Angle between vector v and span(S) in [0, pi/2]; zero vectors give 0."""
    nv = np.linalg.norm(v)
    if nv == 0:
        return 0.0
    return float(np.arccos(np.clip(np.linalg.norm(S.T @ v) / nv, 0.0, 1.0)))


def neighborhood_stats(features, i, p: EgctParams, distances=None, neighbors=None) -> NeighborhoodStats:
    x = np.asarray(features[i])
    if distances is None:
        distances = _ranking_distances(features)
    nbrs = knn(features, i, p.k_nn, distances) if neighbors is None else np.asarray(neighbors)
    kept, tangents, dropped = [], [], []
    for j in nbrs:
        if distances is not None and distances[i, j] <= IDENTICAL_TOL:
            kept.append(int(j))
            tangents.append(np.zeros(x.size))  # coincident point: exact zero, not round-off
            continue
        try:
            v = gm.log_map(x, features[j])
        except CutLocusError:
            dropped.append(int(j))
            continue
        kept.append(int(j))
        tangents.append(gm.flatten(v))
    if len(kept) < 2:
        raise DegenerateNeighborhoodError(
            f"feature {i} has {len(kept)} usable neighbours after dropping {len(dropped)} at the cut locus"
        )
    X = np.vstack(tangents)
    target = np.zeros(X.shape[1])  # log_x(x) = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        code = solve(SparseCodingProblem.from_neighbors(target, X, p.sigma_alpha), p.sc_tol, p.sc_max_iter)
    cov, S = _pca_subspace(X, p.pca_energy)
    theta = np.array([angle_to_subspace(v - target, S) for v in X])
    return NeighborhoodStats(
        index=i,
        neighbor_ids=np.array(kept),
        tangents=X,
        alpha=code.alpha,
        theta=theta,
        cov=cov,
        subspace=S,
        dropped=dropped,
        alpha_degenerate=code.degenerate,
        alpha_converged=code.converged,
    )


def coefficient_matrices(stats, n):
    """Dense ``alpha`` and ``theta`` matrices plus the directed neighbour mask."""
    alpha = np.zeros((n, n))
    theta = np.zeros((n, n))
    mask = np.zeros((n, n), dtype=bool)
    for st in stats:
        alpha[st.index, st.neighbor_ids] = st.alpha
        theta[st.index, st.neighbor_ids] = st.theta
        mask[st.index, st.neighbor_ids] = True
    return alpha, theta, mask


def affinity_from_matrices(alpha, theta, mask, sigma_theta):
    """``w_ij = exp(|a_ij| + |a_ji|) exp(-(t_ij + t_ji)/sigma_theta)`` on KNN edges, 0 elsewhere."""
    a = np.abs(alpha)
    W = np.exp(a + a.T) * np.exp(-(theta + theta.T) / sigma_theta)
    W[~(mask | mask.T)] = 0.0
    np.fill_diagonal(W, 0.0)
    return W


def build_affinity(stats, p: EgctParams, n=None) -> np.ndarray:
    n = len(stats) if n is None else n
    alpha, theta, mask = coefficient_matrices(stats, n)
    return affinity_from_matrices(alpha, theta, mask, p.sigma_theta)


@dataclass
class EgctResult:
    assignment: ClusterAssignment
    affinity: np.ndarray
    stats: list
    louvain: LouvainResult | None = None

    @property
    def labels(self):
        return self.assignment.labels

    @property
    def k(self):
        return self.assignment.k

    def dump_csv(self, prefix):
        """Write affinity, alpha and theta matrices as ``<prefix>_{W,alpha,theta}.csv``."""
        n = self.affinity.shape[0]
        alpha, theta, _ = coefficient_matrices(self.stats, n)
        paths = {}
        for name, M in (("W", self.affinity), ("alpha", alpha), ("theta", theta)):
            path = f"{prefix}_{name}.csv"
            with open(path, "w", newline="", encoding="utf-8") as fh:
                csv.writer(fh).writerows([[repr(float(v)) for v in row] for row in M])
            paths[name] = path
        return paths


def egct(features, p: EgctParams, threads=1) -> EgctResult:
    features = [gm.check_point(x, tol=1e-8) for x in features]
    n = len(features)
    p.check_count(n)
    D = _ranking_distances(features)
    if D.max() <= IDENTICAL_TOL:
        # no geometric structure at all: one cluster
        return EgctResult(ClusterAssignment(np.zeros(n, dtype=int), 1), np.zeros((n, n)), [])

    def one(i):
        return neighborhood_stats(features, i, p, distances=D)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(threads) as pool:
            stats = list(pool.map(one, range(n)))
    else:
        stats = [one(i) for i in range(n)]
    W = build_affinity(stats, p, n)
    res = louvain(W, p.louvain_resolution, p.seed)
    return EgctResult(_merge_duplicates(res.labels, D), W, stats, res)


def _merge_duplicates(labels, D):
    """Coincident features always share the label of their first occurrence."""
    n_groups, group = connected_components(csr_matrix(D <= IDENTICAL_TOL), directed=False)
    if n_groups == len(labels):
        return ClusterAssignment.from_labels(labels)
    first = np.full(n_groups, -1)
    for i, g in enumerate(group):
        if first[g] < 0:
            first[g] = i
    return ClusterAssignment.from_labels(np.asarray(labels)[first[group]])
