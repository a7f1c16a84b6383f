"""Kernel-ARMA observability features.

For a sequence of vectors ``y_0 .. y_{T-1}`` and anchor ``t`` the real matrix
``(1/tau_f) F_{t+1} (*) B_t^T`` has entry

    G[a*N + b, c*N + d] = (1/tau_f) * sum_l k(y[t+1+a+b+l], y[t-c+d+l])

with ``a < m``, ``b, d < N``, ``c < tau_b``, ``l < tau_f``. The feature is the
span of its top ``rho`` left singular vectors, a point on Gr(rho, m*N).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateDataError, InputError, OutOfRangeError
from .kernels import KernelSpec, gram_matrix

log = logging.getLogger(__name__)

RANK_TOL = 1e-10


@dataclass(frozen=True)
class KarmaParams:
    N: int = 30
    m: int = 2
    rho: int = 2
    tau_f: int = 60
    tau_b: int = 20
    buff: int = 20
    stride: int = 1

    def __post_init__(self):
        for name in ("N", "m", "rho", "tau_f", "tau_b", "buff", "stride"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if self.rho > min(self.m * self.N, self.tau_b * self.N):
            raise ConfigError(
                f"rho={self.rho} exceeds min(m*N, tau_b*N) = {min(self.m * self.N, self.tau_b * self.N)}"
            )

    @property
    def ambient_dim(self):
        return self.m * self.N

    @property
    def lookback(self):
        """Samples needed before the anchor (the anchor's own sample excluded)."""
        return self.tau_b - 1

    @property
    def lookahead(self):
        """Samples needed after the anchor."""
        return self.tau_f + self.m + self.N - 2

    @property
    def span(self):
        """Total number of consecutive samples a single feature touches."""
        return self.lookback + self.lookahead + 1

    def window(self, t):
        """Inclusive index range ``(lo, hi)`` used by the feature at anchor t."""
        return t - self.lookback, t + self.lookahead

    def valid_anchors(self, T):
        """Anchors whose window fits inside ``0 .. T-1``."""
        return range(self.lookback, T - self.lookahead)

    def check_length(self, T):
        if self.m + self.tau_f + self.tau_b > T:
            raise ConfigError(f"m + tau_f + tau_b = {self.m + self.tau_f + self.tau_b} exceeds series length {T}")


def as_timeseries(data) -> np.ndarray:
    """Validate a ``T x q`` matrix of samples (rows are time)."""
    Y = np.asarray(data, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.ndim != 2 or Y.shape[0] < 2 or Y.shape[1] < 1:
        raise InputError(f"time series must be a T x q matrix with T >= 2 and q >= 1, got shape {Y.shape}")
    if not np.all(np.isfinite(Y)):
        raise InputError("time series contains non-finite values")
    return Y


def assemble_state_snapshots(ts) -> np.ndarray:
    """Network snapshots: one q-vector per time sample (row t of the matrix)."""
    return as_timeseries(ts).copy()


def assemble_node_windows(node_series, buff) -> np.ndarray:
    """Overlapping length-``buff`` windows of one nodal series, one per start time."""
    y = np.asarray(node_series, dtype=float).ravel()
    if buff < 1 or buff > y.size:
        raise InputError(f"buffer length {buff} must be in [1, {y.size}]")
    return np.lib.stride_tricks.sliding_window_view(y, buff).copy()


def _hankel_indices(p: KarmaParams):
    a = np.arange(p.m)[:, None, None, None]
    b = np.arange(p.N)[None, :, None, None]
    c = np.arange(p.tau_b)[None, None, :, None]
    d = np.arange(p.N)[None, None, None, :]
    rows = np.broadcast_to(1 + a + b, (p.m, p.N, p.tau_b, p.N)).reshape(p.m * p.N, p.tau_b * p.N)
    cols = np.broadcast_to(d - c, (p.m, p.N, p.tau_b, p.N)).reshape(p.m * p.N, p.tau_b * p.N)
    return rows, cols


def _check_range(n_avail, t, p):
    lo, hi = p.window(t)
    if lo < 0:
        raise OutOfRangeError(f"anchor {t} needs sample index {lo}, which is before the series start", lo)
    if hi >= n_avail:
        raise OutOfRangeError(f"anchor {t} needs sample index {hi}, but only {n_avail} samples are available", hi)


def hankel_from_kernel(K: np.ndarray, t: int, p: KarmaParams) -> np.ndarray:
    """Assemble the Gram/Hankel matrix at anchor t from a precomputed kernel matrix K."""
    _check_range(K.shape[0], t, p)
    # offsets r = 1+a+b (forward), s = d-c (backward); entry depends only on (r, s)
    r = np.arange(1, p.m + p.N)
    s = np.arange(-(p.tau_b - 1), p.N)
    lags = np.arange(p.tau_f)
    ri = t + r[:, None, None] + lags[None, None, :]
    si = t + s[None, :, None] + lags[None, None, :]
    core = K[ri, si].mean(axis=2)
    rows, cols = _hankel_indices(p)
    return core[rows - 1, cols + p.tau_b - 1]


def gram_hankel(vectors, t: int, p: KarmaParams, k: KernelSpec) -> np.ndarray:
    """The ``mN x tau_b*N`` matrix ``(1/tau_f) F_{t+1} (*) B_t^T`` at anchor t."""
    V = np.asarray(vectors, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    _check_range(V.shape[0], t, p)
    lo, hi = p.window(t)
    K = gram_matrix(k, V[lo:hi + 1], V[lo:hi + 1])
    return hankel_from_kernel(K, t - lo, p)


def _subspace_from_hankel(G, p: KarmaParams, rank_tol, t=None):
    U, s, _ = np.linalg.svd(G, full_matrices=False)
    where = "" if t is None else f" at anchor {t}"
    if s[0] <= 0 or s[p.rho - 1] <= rank_tol * s[0]:
        raise DegenerateDataError(
            f"Gram/Hankel matrix{where} has numerical rank below rho={p.rho} "
            f"(sigma_rho/sigma_1 = {s[p.rho - 1] / s[0] if s[0] > 0 else 0.0:.3e})"
        )
    tied = p.rho < s.size and np.isclose(s[p.rho - 1], s[p.rho], rtol=1e-9, atol=0)
    return U[:, :p.rho].copy(), bool(tied), s


def extract_feature(vectors, t, p: KarmaParams, k: KernelSpec, rank_tol=RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the estimated observability subspace at anchor t."""
    basis, _, _ = _subspace_from_hankel(gram_hankel(vectors, t, p, k), p, rank_tol, t)
    return basis


@dataclass
class HorizonFeatures:
    anchors: list = field(default_factory=list)
    features: list = field(default_factory=list)
    failures: dict = field(default_factory=dict)
    unstable: list = field(default_factory=list)

    def __len__(self):
        return len(self.features)

    def __iter__(self):
        return iter(zip(self.anchors, self.features))


def default_anchors(T, p: KarmaParams):
    return list(p.valid_anchors(T))[:: p.stride]


def extract_features_over_horizon(vectors, anchors, p: KarmaParams, k: KernelSpec, rank_tol=RANK_TOL,
                                  threads=1) -> HorizonFeatures:
    """One feature per anchor; anchors that cannot produce a feature are reported in ``failures``."""
    V = np.asarray(vectors, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    out = HorizonFeatures()
    anchors = [int(a) for a in anchors]
    if not anchors:
        return out
    valid = [t for t in anchors if p.window(t)[0] >= 0 and p.window(t)[1] < V.shape[0]]
    K = None
    if valid:
        lo = min(p.window(t)[0] for t in valid)
        hi = max(p.window(t)[1] for t in valid)
        K = gram_matrix(k, V[lo:hi + 1], V[lo:hi + 1])

    def one(t):
        try:
            _check_range(V.shape[0], t, p)
            G = hankel_from_kernel(K, t - lo, p)
            return _subspace_from_hankel(G, p, rank_tol, t)
        except (OutOfRangeError, DegenerateDataError) as exc:
            return exc

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(one, anchors))
    else:
        results = [one(t) for t in anchors]

    degenerate = 0
    for t, res in zip(anchors, results):
        if isinstance(res, Exception):
            out.failures[t] = str(res)
            degenerate += isinstance(res, DegenerateDataError)
            continue
        basis, tied, _ = res
        out.anchors.append(t)
        out.features.append(basis)
        if tied:
            out.unstable.append(t)
    if not out.features:
        detail = "; ".join(f"{t}: {msg}" for t, msg in list(out.failures.items())[:5])
        err = DegenerateDataError if degenerate == len(out.failures) > 0 else InputError
        raise err(f"no anchor produced a feature ({len(out.failures)} failed): {detail}")
    if out.failures:
        log.info("%d of %d anchors failed", len(out.failures), len(anchors))
    return out
