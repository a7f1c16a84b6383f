"""Synthetic multi-state network data and noiseless linear state-space series.

The multi-state generator is a community latent-factor model: every community
of a state owns a temporally smooth latent signal, nodes mix the latents of
all communities with weights read off a noisy, outlier-contaminated
connectivity matrix, and independent observation noise is added.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import ConfigError, InputError

SMOOTH_TAPS = np.array([0.25, 0.5, 0.25])
SMOOTH_PASSES = 5
NO_NOISE = -math.inf
RHYTHM_RADIUS = 0.99
LATENT_STD = 0.42
BURN_IN = 200

# default community latents resonate near a per-state centre frequency
# (cycles per sample); communities of one state are detuned around it.
# Every resulting frequency keeps clear of multiples of 1/20 and 1/30, where
# windows of the default nodal lengths hold whole periods and features wobble.
STATE_CENTRES = (0.0175, 0.075, 0.1325, 0.195)
COMMUNITY_DETUNE = 0.015

# community structures of the four default states on 10 nodes
DEFAULT_COMMUNITIES = (
    ((0, 1, 2, 3, 4), (5, 6, 7, 8, 9)),
    ((0, 1, 2), (3, 4, 5, 6), (7, 8, 9)),
    ((0, 2, 4, 6, 8), (1, 3, 5, 7, 9)),
    ((0, 1, 5, 6), (2, 3, 7), (4, 8, 9)),
)

# (mu, sigma_dB) per state for datasets d1..d6

def default_rhythms(communities=None, centres=STATE_CENTRES, detune=COMMUNITY_DETUNE):
    """One frequency per community: ``centre + detune * (c - (k-1)/2)`` for community c of k."""
    communities = DEFAULT_COMMUNITIES if communities is None else communities
    out = []
    for comms, f in zip(communities, centres):
        k = len(comms)
        out.append(tuple(f + detune * (c - (k - 1) / 2) for c in range(k)))
    return tuple(out)


PRESETS = {
    "d1": [(0.0, -10.0)] * 4,
    "d2": [(0.0, -8.0)] * 4,
    "d3": [(0.0, -6.0)] * 4,
    "d4": [(0.2, -10.0), (0.3, -10.0), (0.4, -10.0), (0.5, -10.0)],
    "d5": [(0.2, -8.0), (0.3, -8.0), (0.4, -8.0), (0.5, -8.0)],
    "d6": [(0.2, -6.0), (0.3, -6.0), (0.4, -6.0), (0.5, -6.0)],
}


def db_to_std(db):
    """Amplitude convention: std = 10 ** (dB / 20); -inf disables noise."""
    return 0.0 if db == NO_NOISE else 10.0 ** (db / 20.0)


@dataclass(frozen=True)
class StateSpec:
    communities: tuple
    mu: float = 0.0
    sigma_db: float = -10.0
    n_outlier_entries: int = 36
    samples: int = 150
    signal_noise_db: float | None = None
    latent_ids: tuple | None = None
    rhythm: tuple | None = None

    def __post_init__(self):
        comms = tuple(tuple(int(v) for v in c) for c in self.communities)
        object.__setattr__(self, "communities", comms)
        nodes = [v for c in comms for v in c]
        if not comms or any(len(c) == 0 for c in comms):
            raise ConfigError("communities must be nonempty")
        if sorted(nodes) != list(range(len(nodes))):
            raise ConfigError("communities must partition nodes 0..q-1 disjointly")
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        if self.n_outlier_entries < 0 or self.n_outlier_entries % 2:
            raise ConfigError("n_outlier_entries must be a nonnegative even number")
        if self.latent_ids is not None and len(self.latent_ids) != len(comms):
            raise ConfigError("latent_ids needs one entry per community")
        if self.rhythm is not None:
            rh = self.rhythm
            rh = tuple(float(f) for f in rh) if np.ndim(rh) else (float(rh),) * len(comms)
            if len(rh) != len(comms):
                raise ConfigError("rhythm needs one frequency per community (or a single shared one)")
            if not all(0 < f < 0.5 for f in rh):
                raise ConfigError("rhythm frequencies must lie in (0, 0.5) cycles per sample")
            object.__setattr__(self, "rhythm", rh)

    @property
    def n_nodes(self):
        return sum(len(c) for c in self.communities)

    @property
    def node_labels(self):
        lab = np.empty(self.n_nodes, dtype=int)
        for j, c in enumerate(self.communities):
            lab[list(c)] = j
        return lab

    @property
    def signal_std(self):
        return db_to_std(self.sigma_db if self.signal_noise_db is None else self.signal_noise_db)


def preset_states(name, samples=150, communities=DEFAULT_COMMUNITIES, rhythms=None):
    try:
        params = PRESETS[name.lower()]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose one of {sorted(PRESETS)}") from None
    if rhythms is None:
        rhythms = default_rhythms(communities)
    return [StateSpec(c, mu, db, samples=samples, rhythm=f)
            for c, (mu, db), f in zip(communities, params, rhythms)]


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def gen_connectivity(spec: StateSpec, seed) -> np.ndarray:
    """Ground truth + symmetric Gaussian noise + symmetric outliers."""
    rng = _rng(seed)
    q = spec.n_nodes
    lab = spec.node_labels
    truth = (lab[:, None] == lab[None, :]).astype(float)
    std = db_to_std(spec.sigma_db)
    G = rng.standard_normal((q, q)) * std
    noise = np.triu(G) + np.triu(G, 1).T
    outlier = np.zeros((q, q))
    if spec.n_outlier_entries > q * (q - 1):
        raise ConfigError(f"{spec.n_outlier_entries} outlier entries do not fit in {q * (q - 1)} off-diagonal slots")
    iu = np.triu_indices(q, 1)
    pick = rng.choice(iu[0].size, spec.n_outlier_entries // 2, replace=False)
    outlier[iu[0][pick], iu[1][pick]] = spec.mu
    outlier[iu[1][pick], iu[0][pick]] = spec.mu
    return truth + noise + outlier


def smooth_latent(n, rng, rhythm=None):
    """White Gaussian noise passed SMOOTH_PASSES times through the 3-tap smoother.

    With ``rhythm`` set, the smoothed noise additionally drives a two-pole
    resonator at that frequency and the result is scaled to LATENT_STD.
    """
    extra = 0 if rhythm is None else BURN_IN
    pad = SMOOTH_PASSES * (SMOOTH_TAPS.size - 1)
    x = rng.standard_normal(n + pad + extra)
    for _ in range(SMOOTH_PASSES):
        x = np.convolve(x, SMOOTH_TAPS, mode="valid")
    if rhythm is None:
        return x
    r, w = RHYTHM_RADIUS, 2.0 * np.pi * rhythm
    x = lfilter([1.0], [1.0, -2.0 * r * np.cos(w), r * r], x)[extra:]
    return x * (LATENT_STD / x.std())


@dataclass
class SyntheticDataset:
    series: np.ndarray
    time_labels: np.ndarray
    node_labels: list
    latent_labels: list
    connectivity: list
    states: list
    seed: object = None
    boundaries: list = field(default_factory=list)

    def ground_truth(self):
        """JSON-ready ground-truth sidecar content."""
        return {
            "time_labels": self.time_labels.tolist(),
            "node_labels_per_state": [lab.tolist() for lab in self.node_labels],
            "latent_labels_per_state": [lab.tolist() for lab in self.latent_labels],
            "intervals": [[int(a), int(b), int(j)] for j, (a, b) in enumerate(self.boundaries)],
            "spec": [
                {
                    "communities": [list(c) for c in s.communities],
                    "mu": s.mu,
                    "sigma_db": None if s.sigma_db == NO_NOISE else s.sigma_db,
                    "n_outlier_entries": s.n_outlier_entries,
                    "samples": s.samples,
                    "signal_noise_db": s.signal_noise_db,
                    "latent_ids": None if s.latent_ids is None else list(s.latent_ids),
                    "rhythm": None if s.rhythm is None else list(s.rhythm),
                }
                for s in self.states
            ],
            "seed": self.seed,
        }


def gen_timeseries(state_specs, seed) -> SyntheticDataset:
    """Concatenate the states' signals; returns series plus time/node ground truth."""
    states = list(state_specs)
    if not states:
        raise InputError("at least one state is required")
    q = states[0].n_nodes
    if any(s.n_nodes != q for s in states):
        raise InputError("all states must have the same number of nodes")
    rng = _rng(seed)
    T = sum(s.samples for s in states)

    # latents keyed by id; shared ids continue across states
    keys = []
    for j, s in enumerate(states):
        ids = s.latent_ids if s.latent_ids is not None else [("s", j, c) for c in range(len(s.communities))]
        keys.append(list(ids))
    latents = {}
    for j, ids in enumerate(keys):
        rh = states[j].rhythm or (None,) * len(ids)
        for key, f in zip(ids, rh):
            if key not in latents:
                latents[key] = smooth_latent(T, rng, f)

    Y = np.empty((T, q))
    time_labels = np.empty(T, dtype=int)
    node_labels, latent_labels, conn, bounds = [], [], [], []
    order = {}
    start = 0
    for j, s in enumerate(states):
        M = gen_connectivity(s, rng)
        stop = start + s.samples
        Z = np.column_stack([latents[key][start:stop] for key in keys[j]])
        coupling = np.column_stack([M[:, list(c)].mean(axis=1) for c in s.communities])
        noise = rng.standard_normal((s.samples, q)) * s.signal_std
        Y[start:stop] = Z @ coupling.T + noise
        time_labels[start:stop] = j
        node_labels.append(s.node_labels)
        latent_labels.append(np.array([order.setdefault(keys[j][c], len(order)) for c in s.node_labels]))
        conn.append(M)
        bounds.append((start, stop - 1))
        start = stop
    return SyntheticDataset(Y, time_labels, node_labels, latent_labels, conn, states,
                            seed if not isinstance(seed, np.random.Generator) else None, bounds)


def rotation(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class LinearStateSpaceSpec:
    """Linear state space whose windowed outputs obey ``phi_t = C psi_t``.

    ``phi_t`` stacks ``y_t .. y_{t+N-1}``, so C must be shift consistent:
    ``C[1:] == C[:-1] @ A``. Build one with :meth:`from_output_row`.
    The state is ``rho x q``: each of the q channels carries its own copy.
    """

    C: np.ndarray
    A: np.ndarray
    psi0: np.ndarray
    noise_upsilon: float = 0.0
    noise_omega: float = 0.0

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        psi0 = np.asarray(self.psi0, dtype=float)
        if psi0.ndim == 1:
            psi0 = psi0[:, None]
        rho = A.shape[0]
        if A.shape != (rho, rho) or C.shape[1] != rho or psi0.shape[0] != rho:
            raise ConfigError(f"inconsistent shapes C{C.shape}, A{A.shape}, psi0{psi0.shape}")
        if np.max(np.abs(np.linalg.eigvals(A))) >= 1:
            raise ConfigError("state matrix A must have spectral radius < 1")
        if C.shape[0] > 1 and not np.allclose(C[1:], C[:-1] @ A, rtol=1e-10, atol=1e-12):
            raise ConfigError("C is not shift consistent (C[1:] != C[:-1] @ A)")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "psi0", psi0)

    @classmethod
    def from_output_row(cls, c, A, N, psi0, **noise):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        rows = [np.asarray(c, dtype=float).ravel()]
        for _ in range(N - 1):
            rows.append(rows[-1] @ A)
        return cls(np.vstack(rows), A, psi0, **noise)

    @property
    def rho(self):
        return self.A.shape[0]

    @property
    def N(self):
        return self.C.shape[0]

    def observability(self, m):
        """``[C; CA; ...; CA^{m-1}]``, shape ``mN x rho``."""
        blocks, CA = [], self.C
        for _ in range(m):
            blocks.append(CA)
            CA = CA @ self.A
        return np.vstack(blocks)


def gen_linear_ss(spec: LinearStateSpaceSpec, T, seed) -> np.ndarray:
    """Simulate ``psi_t = A psi_{t-1} + w_t``, ``y_t = C[0] psi_t + v_t``; returns ``T x q``."""
    if T < 2:
        raise InputError("T must be >= 2")
    rng = _rng(seed)
    rho, q = spec.psi0.shape
    psi = spec.psi0.copy()
    Y = np.empty((T, q))
    c0 = spec.C[0]
    for t in range(T):
        if t > 0:
            psi = spec.A @ psi + spec.noise_omega * rng.standard_normal((rho, q))
        Y[t] = c0 @ psi + spec.noise_upsilon * rng.standard_normal(q)
    return Y
