"""Track a community whose latent persists across two states, over several seeds."""
import argparse

from grassclust import experiments, synthgen
from grassclust.config import RunConfig, load_config


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", default="d1", choices=sorted(synthgen.PRESETS))
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("-c", "--config")
    args = ap.parse_args()
    cfg = load_config(args.config) if args.config else RunConfig()
    states = experiments.persistent_states(args.preset)
    shared = 0
    for seed in range(args.seeds):
        score, ok = experiments.subnet_trial(states, seed, cfg)
        shared += ok
        print(f"seed {seed:3d}  nmi {score:.3f}  persistent community on one label: {ok}", flush=True)
    print(f"one label on {shared}/{args.seeds} seeds")


if __name__ == "__main__":
    main()
