"""Median state and community scores over seeds for one or more presets.

    python scripts/seed_table.py --presets d1 d3 d6 --seeds 10 --csv table.csv
"""
import argparse
import csv

import numpy as np

from grassclust import experiments, synthgen
from grassclust.config import RunConfig, load_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--presets", nargs="+", default=["d1"], choices=sorted(synthgen.PRESETS))
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("-c", "--config")
    ap.add_argument("--csv", help="also write per-seed rows here")
    args = ap.parse_args()
    cfg = load_config(args.config) if args.config else RunConfig()

    rows = []
    print(f"{'preset':6s} {'acc':>6s} {'nmi':>6s} {'kmeans':>6s} {'comm':>6s} {'sec':>5s}")
    for preset in args.presets:
        states = synthgen.preset_states(preset)
        for seed in range(args.seeds):
            tr = experiments.state_trial(states, seed, cfg, baseline=True)
            comm = experiments.community_trial(states, seed, cfg, time_labels=tr.time_labels)
            rows.append({"preset": preset, "seed": seed, "accuracy": tr.accuracy, "nmi": tr.nmi,
                         "kmeans": tr.baseline_accuracy, "communities": float(np.median(list(comm.values()))),
                         "n_states": tr.n_states, "seconds": tr.seconds})
        mine = [r for r in rows if r["preset"] == preset]
        med = {k: np.median([r[k] for r in mine]) for k in ("accuracy", "nmi", "kmeans", "communities", "seconds")}
        print(f"{preset:6s} {med['accuracy']:6.3f} {med['nmi']:6.3f} {med['kmeans']:6.3f} "
              f"{med['communities']:6.3f} {med['seconds']:5.1f}", flush=True)

    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)


if __name__ == "__main__":
    main()
