"""Command-line interface.

Subcommands: simulate, extract, cluster-states, detect-communities,
track-subnets, evaluate. Exit status is 0 on success, 1 on input or
configuration errors and 2 when the data are degenerate.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import evaluation, karma, pipeline, synthgen
from .config import RunConfig, load_config
from .errors import ConfigError, DegenerateDataError, GrassclustError, InputError

log = logging.getLogger("grassclust")

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(message)


def read_series_csv(path):
    """Read a ``T x q`` series: one header row of node ids, then one row per sample."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise InputError(f"{path}: need a header row and at least one data row")
    header = rows[0]
    try:
        data = np.array([[float(v) for v in row] for row in rows[1:] if row], dtype=float)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
    if data.ndim != 2 or data.shape[1] != len(header):
        raise InputError(f"{path}: rows do not match the {len(header)} header columns")
    return header, karma.as_timeseries(data)


def write_series_csv(path, Y, header=None):
    header = header or [f"node{j}" for j in range(Y.shape[1])]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows([[repr(float(v)) for v in row] for row in Y])


def write_json(path, obj):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _out_dir(args):
    if args.output is None:
        return None
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    threads = args.threads or int(os.environ.get("GRASSCLUST_THREADS", cfg.threads) or 1)
    seed = cfg.seed if args.seed is None else args.seed
    cfg = cfg.with_seed(seed)
    from dataclasses import replace

    return replace(cfg, threads=max(1, threads))


def _report(labels, intervals, metrics, cfg, warnings, **extra):
    rep = {
        "labels": labels,
        "intervals": intervals,
        "metrics": metrics,
        "parameters": cfg.to_dict(),
        "seed": cfg.seed,
        "warnings": warnings,
    }
    rep.update(extra)
    return rep


def _load_truth(path):
    if path is None:
        return None
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _load_partition(path):
    obj = _load_truth(path)
    ivs = obj.get("intervals")
    if not ivs:
        raise InputError(f"{path}: no 'intervals' entry")
    return pipeline.StatePartition([tuple(iv) for iv in ivs])


def _dump(result, out, name, args):
    if args.dump_affinity and out is not None:
        return {k: os.path.basename(v) for k, v in result.dump_csv(str(out / name)).items()}
    return None


def cmd_simulate(args):
    cfg = _config(args)
    states = synthgen.preset_states(args.preset, samples=args.samples)
    ds = synthgen.gen_timeseries(states, cfg.seed)
    out = _out_dir(args) or Path(".")
    write_series_csv(out / "series.csv", ds.series)
    truth = ds.ground_truth()
    truth["preset"] = args.preset
    write_json(out / "truth.json", truth)
    return EXIT_OK


def cmd_extract(args):
    cfg = _config(args)
    tc = cfg.task(args.task)
    _, Y = read_series_csv(args.input)
    if args.task == "states":
        vectors = karma.assemble_state_snapshots(Y)
        anchors = karma.default_anchors(Y.shape[0], tc.karma)
        feats = karma.extract_features_over_horizon(vectors, anchors, tc.karma, tc.kernel, threads=cfg.threads)
        rows = [(t, basis) for t, basis in feats]
        warnings = [f"anchor {t}: {m}" for t, m in feats.failures.items()]
        keys = [str(t) for t, _ in rows]
    else:
        part = pipeline.StatePartition([(0, Y.shape[0] - 1, 0)])
        feats, index, skipped = pipeline.nodal_features(Y, part, tc)
        rows = list(zip(index, feats))
        warnings = list(skipped.values())
        keys = [f"{j}:{node}" for (j, node), _ in rows]
    out = _out_dir(args)
    rep = _report(keys, [], {}, cfg, warnings, n_features=len(rows))
    if out is not None:
        with open(out / "features.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            for key, (_, basis) in zip(keys, rows):
                w.writerow([key] + [repr(float(v)) for v in basis.reshape(-1, order="F")])
        write_json(out / "report.json", rep)
    else:
        write_json(None, rep)
    return EXIT_OK


def _state_metrics(labels, truth):
    if truth is None or "time_labels" not in truth:
        return {}
    t = truth["time_labels"]
    return {"accuracy": evaluation.accuracy(labels, t), "nmi": evaluation.nmi(labels, t)}


def cmd_cluster_states(args):
    cfg = _config(args)
    _, Y = read_series_csv(args.input)
    sc = pipeline.cluster_states(Y, cfg)
    out = _out_dir(args)
    labels = sc.time_labels.tolist()
    rep = _report(labels, [list(iv) for iv in sc.partition.intervals], _state_metrics(labels, _load_truth(args.truth)),
                  cfg, sc.report["warnings"], anchors=sc.report["anchors"], feature_labels=sc.report["feature_labels"])
    dumped = _dump(sc.result, out, "states_affinity", args)
    if dumped:
        rep["dumps"] = dumped
    write_json(None if out is None else out / "report.json", rep)
    return EXIT_OK


def _partition_for(args, Y, cfg):
    if args.partition:
        return _load_partition(args.partition), []
    sc = pipeline.cluster_states(Y, cfg)
    return sc.partition, sc.report["warnings"]


def cmd_detect_communities(args):
    cfg = _config(args)
    _, Y = read_series_csv(args.input)
    part, warnings = _partition_for(args, Y, cfg)
    results, skipped = pipeline.detect_communities(Y, part, cfg)
    truth = _load_truth(args.truth)
    labels, metrics = {}, {}
    out = _out_dir(args)
    for r in results:
        labels[str(r.interval)] = r.assignment.labels.tolist()
        if truth is not None and "node_labels_per_state" in truth and "time_labels" in truth:
            a, b, _ = part.intervals[r.interval]
            true_state = int(np.bincount(np.asarray(truth["time_labels"][a:b + 1])).argmax())
            tl = truth["node_labels_per_state"][true_state]
            metrics[str(r.interval)] = {
                "true_state": true_state,
                "accuracy": evaluation.accuracy(r.assignment.labels, tl),
                "nmi": evaluation.nmi(r.assignment.labels, tl),
            }
        _dump(r.result, out, f"communities_{r.interval}_affinity", args)
    warnings = warnings + [f"interval {j} skipped: {m}" for j, m in skipped.items()]
    rep = _report(labels, [list(iv) for iv in part.intervals], metrics, cfg, warnings)
    write_json(None if out is None else out / "report.json", rep)
    return EXIT_OK


def cmd_track_subnets(args):
    cfg = _config(args)
    _, Y = read_series_csv(args.input)
    part, warnings = _partition_for(args, Y, cfg)
    res = pipeline.track_subnetworks(Y, part, cfg)
    out = _out_dir(args)
    truth = _load_truth(args.truth)
    metrics = {}
    if truth is not None and "latent_labels_per_state" in truth and "time_labels" in truth:
        tl = []
        for j, node in res.index:
            a, b, _ = part.intervals[j]
            true_state = int(np.bincount(np.asarray(truth["time_labels"][a:b + 1])).argmax())
            tl.append(truth["latent_labels_per_state"][true_state][node])
        metrics = {"accuracy": evaluation.accuracy(res.assignment.labels, tl),
                   "nmi": evaluation.nmi(res.assignment.labels, tl)}
    rep = _report(res.assignment.labels.tolist(), [list(iv) for iv in part.intervals], metrics, cfg,
                  warnings + [f"interval {j} skipped: {m}" for j, m in res.skipped.items()],
                  index=[list(ix) for ix in res.index])
    dumped = _dump(res.result, out, "subnets_affinity", args)
    if dumped:
        rep["dumps"] = dumped
    write_json(None if out is None else out / "report.json", rep)
    return EXIT_OK


def _labels_from(obj, path):
    for key in ("labels", "time_labels"):
        if key in obj and isinstance(obj[key], list):
            return obj[key]
    raise InputError(f"{path}: no 'labels' or 'time_labels' list")


def cmd_evaluate(args):
    pred = _labels_from(_load_truth(args.pred), args.pred)
    truth = _labels_from(_load_truth(args.truth), args.truth)
    metrics = {"accuracy": evaluation.accuracy(pred, truth), "nmi": evaluation.nmi(pred, truth)}
    write_json(None if args.output is None else _out_dir(args) / "metrics.json", metrics)
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="TOML configuration file")
    common.add_argument("-o", "--output", help="output directory (reports go to stdout when omitted)")
    common.add_argument("--seed", type=int, help="random seed (overrides the config)")
    common.add_argument("--threads", type=int, help="worker threads (env GRASSCLUST_THREADS)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="grassclust", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="generate a synthetic multi-state dataset")
    p.add_argument("--preset", default="d1", choices=sorted(synthgen.PRESETS))
    p.add_argument("--samples", type=int, default=150, help="samples per state")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("extract", parents=[common], help="extract Grassmannian features")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--task", choices=("states", "communities", "subnets"), default="states")
    p.set_defaults(func=cmd_extract)

    for name, func, help_ in (
        ("cluster-states", cmd_cluster_states, "parcel the time horizon into network states"),
        ("detect-communities", cmd_detect_communities, "node communities per state"),
        ("track-subnets", cmd_track_subnets, "subnetwork state sequences across states"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("-i", "--input", required=True)
        p.add_argument("--truth", help="ground-truth JSON for scoring")
        p.add_argument("--dump-affinity", action="store_true", help="write W, alpha, theta matrices as CSV")
        if name != "cluster-states":
            p.add_argument("--partition", help="report.json from cluster-states (otherwise states are clustered first)")
        p.set_defaults(func=func)

    p = sub.add_parser("evaluate", parents=[common], help="score predicted labels against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.set_defaults(func=cmd_evaluate)
    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            raise InputError("a subcommand is required")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except DegenerateDataError as exc:
        print(f"grassclust: degenerate data: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (InputError, ConfigError, GrassclustError, OSError) as exc:
        print(f"grassclust: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
