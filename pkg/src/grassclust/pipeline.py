"""The three clustering tasks: network states, per-state communities and subnetwork sequences."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import karma
from .config import RunConfig, TaskConfig
from .egct import EgctResult, egct
from .errors import DegenerateDataError, InputError
from .louvain import ClusterAssignment

log = logging.getLogger(__name__)


@dataclass
class StatePartition:
    """Disjoint, ordered, inclusive ``(start, end, label)`` intervals covering a horizon."""

    intervals: list

    def __post_init__(self):
        self.intervals = [(int(a), int(b), int(c)) for a, b, c in self.intervals]
        prev_end = None
        for a, b, _ in self.intervals:
            if b < a:
                raise InputError(f"empty interval ({a}, {b})")
            if prev_end is not None and a != prev_end + 1:
                raise InputError("intervals must be contiguous and ordered")
            prev_end = b

    @classmethod
    def from_labels(cls, labels):
        labels = np.asarray(labels)
        cuts = np.flatnonzero(np.diff(labels)) + 1
        starts = np.concatenate([[0], cuts])
        ends = np.concatenate([cuts - 1, [labels.size - 1]])
        return cls([(s, e, labels[s]) for s, e in zip(starts, ends)])

    def labels(self):
        out = np.empty(self.intervals[-1][1] + 1, dtype=int)
        for a, b, c in self.intervals:
            out[a:b + 1] = c
        return out

    def __len__(self):
        return len(self.intervals)


@dataclass
class StateClustering:
    partition: StatePartition
    anchors: list
    feature_labels: ClusterAssignment
    time_labels: np.ndarray
    result: EgctResult
    features: list
    report: dict = field(default_factory=dict)


def vote_time_labels(T, anchors, labels, k, tc: TaskConfig):
    """Per-sample majority label over the features whose index window covers the sample."""
    votes = np.zeros((T, k))
    for t, lab in zip(anchors, labels):
        lo, hi = tc.karma.window(t)
        votes[lo:hi + 1, lab] += 1
    covered = votes.sum(axis=1) > 0
    out = votes.argmax(axis=1)
    if not covered.all():
        idx = np.flatnonzero(covered)
        nearest = idx[np.clip(np.searchsorted(idx, np.arange(T)), 0, idx.size - 1)]
        left = idx[np.clip(np.searchsorted(idx, np.arange(T)) - 1, 0, idx.size - 1)]
        pick = np.where(np.abs(left - np.arange(T)) <= np.abs(nearest - np.arange(T)), left, nearest)
        out = out[pick]
    return out


def _runs(labels):
    return StatePartition.from_labels(labels).intervals


def _smooth_short_runs(time_labels, anchors, feat_labels, W, tc: TaskConfig):
    labels = time_labels.copy()
    windows = np.array([tc.karma.window(t) for t in anchors])

    def feats_touching(lab, a, b):
        hit = (feat_labels == lab) & (windows[:, 0] <= b) & (windows[:, 1] >= a)
        return np.flatnonzero(hit)

    while True:
        runs = _runs(labels)
        if len(runs) == 1:
            return labels
        lengths = [b - a + 1 for a, b, _ in runs]
        short = [i for i, n in enumerate(lengths) if n < tc.min_dwell]
        if not short:
            return labels
        i = min(short, key=lambda j: (lengths[j], j))
        a, b, lab = runs[i]
        options = []
        for j in (i - 1, i + 1):
            if 0 <= j < len(runs):
                na, nb, nlab = runs[j]
                own = feats_touching(lab, a, b)
                other = feats_touching(nlab, min(a, na), max(b, nb))
                score = float(np.median(W[np.ix_(own, other)])) if own.size and other.size else -np.inf
                options.append((-score, j, nlab))
        _, _, new_label = min(options)
        labels[a:b + 1] = new_label


def cluster_states(ts, cfg: RunConfig) -> StateClustering:
    """Parcel the time horizon into network states."""
    tc = cfg.states
    Y = karma.as_timeseries(ts)
    T = Y.shape[0]
    tc.karma.check_length(T)
    snaps = karma.assemble_state_snapshots(Y)
    anchors = karma.default_anchors(T, tc.karma)
    if len(anchors) < tc.egct.k_nn + 1:
        raise InputError(f"series of length {T} yields {len(anchors)} anchors; need at least {tc.egct.k_nn + 1}")
    feats = karma.extract_features_over_horizon(snaps, anchors, tc.karma, tc.kernel, threads=cfg.threads)
    res = egct(feats.features, tc.egct, threads=cfg.threads)
    raw = vote_time_labels(T, feats.anchors, res.labels, res.k, tc)
    smoothed = _smooth_short_runs(raw, feats.anchors, res.labels, res.affinity, tc)
    # relabel states in order of first appearance
    relabeled = ClusterAssignment.from_labels(smoothed).labels
    partition = StatePartition.from_labels(relabeled)
    warnings = [f"anchor {t}: {msg}" for t, msg in feats.failures.items()]
    warnings += [f"anchor {t}: tied singular values at rank cut" for t in feats.unstable]
    report = {
        "anchors": list(map(int, feats.anchors)),
        "feature_labels": res.labels.tolist(),
        "n_clusters": int(res.k),
        "n_states": int(len(set(relabeled.tolist()))),
        "warnings": warnings,
    }
    return StateClustering(partition, feats.anchors, res.assignment, relabeled, res, feats.features, report)


def nodal_anchors(start, end, tc: TaskConfig):
    """Anchors whose K-ARMA range over nodal windows stays inside ``[start, end]``."""
    p = tc.karma
    lo = start + p.lookback
    hi = end - p.lookahead - (p.buff - 1)
    return list(range(lo, hi + 1))


def central_anchor(start, end, tc: TaskConfig):
    cands = nodal_anchors(start, end, tc)
    if not cands:
        return None
    p = tc.karma
    mid = (start + end) / 2.0
    centers = [((t - p.lookback) + (t + p.lookahead + p.buff - 1)) / 2.0 for t in cands]
    return cands[int(np.argmin(np.abs(np.array(centers) - mid)))]


def sample_range(t, tc: TaskConfig):
    """Inclusive sample range touched by a nodal feature at anchor t."""
    lo, hi = tc.karma.window(t)
    return lo, hi + tc.karma.buff - 1


def nodal_features(ts, partition: StatePartition, tc: TaskConfig):
    """One feature per node per interval; returns ``(features, index, skipped)``.

    ``index`` lists ``(interval_id, node)`` per feature; ``skipped`` maps
    interval ids to a diagnostic for intervals too short for any anchor.
    """
    Y = karma.as_timeseries(ts)
    feats, index, skipped = [], [], {}
    for j, (a, b, _) in enumerate(partition.intervals):
        t = central_anchor(a, b, tc)
        if t is None:
            need = tc.karma.span + tc.karma.buff - 1
            skipped[j] = f"interval {a}..{b} has {b - a + 1} samples; a nodal feature needs {need}"
            continue
        lo, hi = sample_range(t, tc)
        assert a <= lo and hi <= b, "nodal window crosses an interval boundary"
        for node in range(Y.shape[1]):
            windows = karma.assemble_node_windows(Y[a:b + 1, node], tc.karma.buff)
            feats.append(karma.extract_feature(windows, t - a, tc.karma, tc.kernel))
            index.append((j, node))
    return feats, index, skipped


@dataclass
class CommunityResult:
    interval: int
    state: int
    assignment: ClusterAssignment
    result: EgctResult


def detect_communities(ts, partition: StatePartition, cfg: RunConfig):
    """Node communities per state interval; intervals too short are skipped and reported."""
    tc = cfg.communities
    feats, index, skipped = nodal_features(ts, partition, tc)
    out = []
    for j, (_, _, state) in enumerate(partition.intervals):
        ids = [i for i, (jj, _) in enumerate(index) if jj == j]
        if not ids:
            continue
        res = egct([feats[i] for i in ids], tc.egct, threads=cfg.threads)
        out.append(CommunityResult(j, state, res.assignment, res))
    if not out:
        raise InputError("no state interval is long enough for community detection: " + "; ".join(skipped.values()))
    return out, skipped


@dataclass
class SubnetResult:
    assignment: ClusterAssignment
    index: list
    result: EgctResult
    skipped: dict

    def labels_by_interval(self):
        table = {}
        for (j, node), lab in zip(self.index, self.assignment.labels):
            table.setdefault(j, {})[node] = int(lab)
        return table


def track_subnetworks(ts, partition: StatePartition, cfg: RunConfig) -> SubnetResult:
    """Cluster the pooled (node, interval) features of all states jointly."""
    tc = cfg.subnets
    feats, index, skipped = nodal_features(ts, partition, tc)
    if not feats:
        raise InputError("no state interval is long enough for subnetwork tracking: " + "; ".join(skipped.values()))
    res = egct(feats, tc.egct, threads=cfg.threads)
    return SubnetResult(res.assignment, index, res, skipped)
