"""Seeded trial runners shared by the acceptance suite and the scripts."""
from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from . import evaluation, pipeline, synthgen
from .config import RunConfig


@dataclass
class StateTrial:
    seed: int
    accuracy: float
    nmi: float
    n_states: int
    seconds: float
    baseline_accuracy: float | None = None
    time_labels: np.ndarray | None = None


def noisy_states(sigma_db=-6.0, mu=0.4, samples=150):
    """Default four states with one noise level and outlier value for every state."""
    return [replace(s, sigma_db=sigma_db, mu=mu) for s in synthgen.preset_states("d1", samples)]


def state_trial(states, seed, cfg: RunConfig | None = None, baseline=False, k_true=None) -> StateTrial:
    cfg = (cfg or RunConfig()).with_seed(seed)
    ds = synthgen.gen_timeseries(states, seed)
    t0 = time.perf_counter()
    sc = pipeline.cluster_states(ds.series, cfg)
    elapsed = time.perf_counter() - t0
    trial = StateTrial(seed, evaluation.accuracy(sc.time_labels, ds.time_labels),
                       evaluation.nmi(sc.time_labels, ds.time_labels), sc.report["n_states"], elapsed,
                       time_labels=sc.time_labels)
    if baseline:
        k = k_true or len(states)
        X = np.stack([f.reshape(-1, order="F") for f in sc.features])
        km = evaluation.kmeans_baseline(X, k, seed=seed, restarts=10)
        labels = pipeline.vote_time_labels(ds.series.shape[0], sc.anchors, km.labels, k, cfg.states)
        trial.baseline_accuracy = evaluation.accuracy(labels, ds.time_labels)
    return trial


def community_trial(states, seed, cfg: RunConfig | None = None, time_labels=None):
    """Node accuracy per true state.

    Intervals come from ``time_labels`` (an estimated labelling) when given,
    else from the ground truth. Each interval is scored against the true state
    that covers most of it; several intervals of one state are averaged.
    """
    cfg = (cfg or RunConfig()).with_seed(seed)
    ds = synthgen.gen_timeseries(states, seed)
    part = pipeline.StatePartition.from_labels(ds.time_labels if time_labels is None else time_labels)
    results, _ = pipeline.detect_communities(ds.series, part, cfg)
    scores = {}
    for r in results:
        a, b, _ = part.intervals[r.interval]
        true_state = int(np.bincount(ds.time_labels[a:b + 1]).argmax())
        scores.setdefault(true_state, []).append(evaluation.accuracy(r.assignment.labels, ds.node_labels[true_state]))
    return {j: float(np.mean(v)) for j, v in sorted(scores.items())}


# well separated rhythms for the tracking example; the shorter subnet windows
# resolve frequency more coarsely than the community ones
PERSISTENT_RHYTHMS = ((0.03, 0.09), (0.03, 0.15, 0.21))


def persistent_states(preset="d1", samples=150, rhythms=PERSISTENT_RHYTHMS):
    """First two preset states; the first community's latent carries over from one to the next."""
    s0, s1 = synthgen.preset_states(preset, samples, rhythms=rhythms)[:2]
    s0 = replace(s0, latent_ids=("A",) + tuple(f"a{i}" for i in range(1, len(s0.communities))))
    s1 = replace(s1, latent_ids=("A",) + tuple(f"b{i}" for i in range(1, len(s1.communities))))
    return [s0, s1]


def subnet_trial(states, seed, cfg: RunConfig | None = None):
    """NMI of pooled (node, state) labels against the latent truth, and whether latent 0 kept one label."""
    cfg = (cfg or RunConfig()).with_seed(seed)
    ds = synthgen.gen_timeseries(states, seed)
    part = pipeline.StatePartition.from_labels(ds.time_labels)
    res = pipeline.track_subnetworks(ds.series, part, cfg)
    truth = np.array([ds.latent_labels[j][node] for j, node in res.index])
    shared = np.unique(res.assignment.labels[truth == 0]).size == 1
    return evaluation.nmi(res.assignment.labels, truth), bool(shared)
