"""Command-line entry point: ``python -m contagion_eph <command> ...``.

Failures exit with status 1 (2 for usage errors) and a single stderr line of
the form ``error type=<ExceptionName> message="..."``.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import datasets as ds
from .contagion import PER_EDGE, PER_NODE, ContagionParams, InfectedFraction, StepCap, run
from .eph import KINDS, extended_persistence
from .experiments import SCENARIOS, ExperimentConfig, derive_seed, run_scenario
from .features import CSV_COLUMNS, featurize_batch
from .filtration import SimplexFiltration, extend_to_edges, format_filtration, trace_filtration
from .graph import sample_nodes
from .learn import accuracy_with_ci, fit_forest, fit_poly, fit_tree, predict_theta, r2_score, split_indices


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="YAML experiment config")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--workers", type=int, help="worker processes")
    p.add_argument("--out", help="output file or directory")
    p.add_argument("--dataset", help="graph file")
    p.add_argument("--format", default="edge-list", choices=["edge-list", "temporal"])
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _contagion_flags(p: argparse.ArgumentParser):
    p.add_argument("--model", choices=["simple", "threshold"], default="simple")
    p.add_argument("--q", type=float, default=0.02)
    p.add_argument("--theta", type=int, default=2)
    p.add_argument("--seed-count", type=int)
    p.add_argument("--sub-threshold", choices=[PER_EDGE, PER_NODE], default=PER_EDGE)
    stop = p.add_mutually_exclusive_group()
    stop.add_argument("--fraction", type=float, default=0.85, help="stop at this infected fraction")
    stop.add_argument("--step-cap", type=int, help="stop after this many steps")
    p.add_argument("--runs", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(prog="contagion_eph", parents=[common],
                                     description="Contagion simulation and extended persistence features.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="simulate contagions, write per-node infection steps")
    _contagion_flags(p)

    p = sub.add_parser("filtration", parents=[common], help="dump the filtration of one simulated trace")
    _contagion_flags(p)

    p = sub.add_parser("eph", parents=[common], help="extended persistence diagram of a vertex filtration")
    p.add_argument("--filtration", required=True, help='file of "node value" lines')
    p.add_argument("--reducer", default="cone", choices=["cone", "standard", "twist"])

    p = sub.add_parser("features", parents=[common], help="simulate and featurize")
    _contagion_flags(p)
    p.add_argument("--observe", type=float, default=1.0, help="fraction of nodes observed")

    p = sub.add_parser("classify", parents=[common], help="train/test a simple-vs-complex classifier")
    p.add_argument("--features", required=True, help="feature CSV")
    p.add_argument("--feature", default="eph", choices=["eph", "baseline_corr"])
    p.add_argument("--classifier", default="tree", choices=["tree", "forest"])
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--model-out", help="write the fitted tree here")

    p = sub.add_parser("regress", parents=[common], help="polynomial regression of theta or q on EPH")
    p.add_argument("--features", required=True, help="feature CSV")
    p.add_argument("--target", choices=["theta", "q"], default="theta")
    p.add_argument("--degree", type=int)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--model-out", help="write the fitted polynomial here")

    p = sub.add_parser("experiment", parents=[common], help="run a configured scenario")
    p.add_argument("scenario", choices=SCENARIOS)
    p.add_argument("--runs", type=int, help="override runs_per_cell")
    return parser


# -- helpers ------------------------------------------------------------------------

def _graph(args):
    if not args.dataset:
        raise ValueError("--dataset is required")
    return ds.load_graph(args.dataset, args.format)


def _params(args) -> ContagionParams:
    term = StepCap(args.step_cap) if args.step_cap else InfectedFraction(args.fraction)
    if args.model == "simple":
        return ContagionParams.simple(args.q, seed_count=args.seed_count, termination=term)
    return ContagionParams.threshold(args.theta, args.q, seed_count=args.seed_count,
                                     termination=term, sub_threshold=args.sub_threshold)


def _traces(args, g):
    params = _params(args)
    master = args.seed or 0
    cell = f"cli/{params.model}/q={params.q!r}/theta={params.theta}"
    return [run(g, params, derive_seed(master, cell, r)) for r in range(args.runs)]


def _emit(text: str, out: str | None):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv(header, rows) -> str:
    import io
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _read_features(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no feature rows")
    missing = {"model", "eph", "baseline_corr"} - set(rows[0])
    if missing:
        raise ValueError(f"{path}: missing columns {sorted(missing)}")
    return rows


# -- commands -----------------------------------------------------------------------

def cmd_simulate(args):
    g = _graph(args)
    rows = []
    for r, tr in enumerate(_traces(args, g)):
        rows += [(r, tr.rng_seed, v, int(s)) for v, s in enumerate(tr.infection_step)]
    _emit(_csv(("run", "rng_seed", "node", "infection_step"), rows), args.out)


def cmd_filtration(args):
    g = _graph(args)
    tr = _traces(args, g)[0]
    _emit(format_filtration(g, trace_filtration(g, tr)), args.out)


def _read_vertex_values(path, n) -> np.ndarray:
    values = np.full(n, np.nan)
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        toks = line.replace(",", " ").split()
        if not toks or toks[0].startswith("#"):
            continue
        if len(toks) != 2:
            continue  # edge lines "u v value" are recomputed from vertices
        try:
            v, x = int(toks[0]), float(toks[1])
        except ValueError:
            raise ValueError(f"{path}:{lineno}: expected 'node value'") from None
        if not 0 <= v < n:
            raise ValueError(f"{path}:{lineno}: node {v} out of range")
        values[v] = x
    if np.isnan(values).any():
        raise ValueError(f"{path}: {int(np.isnan(values).sum())} nodes have no value")
    return values


def cmd_eph(args):
    g = _graph(args)
    filt = extend_to_edges(g, _read_vertex_values(args.filtration, g.node_count))
    _emit(extended_persistence(g, filt, reducer=args.reducer).to_csv(), args.out)


def cmd_features(args):
    g = _graph(args)
    traces = _traces(args, g)
    obs = None
    if args.observe < 1.0:
        obs = sample_nodes(g, args.observe, np.random.default_rng(derive_seed(args.seed or 0, "cli/observe", 0)))
    rows = featurize_batch(g, traces, obs)
    _emit(_csv(CSV_COLUMNS, [r.as_csv_fields() for r in rows]), args.out)


def cmd_classify(args):
    rows = _read_features(args.features)
    x = np.array([float(r[args.feature]) for r in rows])
    y = np.array(["simple" if r["model"] == "simple" else "complex" for r in rows])
    rng = np.random.default_rng(derive_seed(args.seed or 0, "cli/classify", 0))
    tr, te = split_indices(len(y), args.train_fraction, rng, y)
    model = fit_forest(x[tr], y[tr], rng) if args.classifier == "forest" else fit_tree(x[tr], y[tr])
    acc, lo, hi = accuracy_with_ci(model.predict(x[te]), y[te])
    if args.model_out and args.classifier == "tree":
        Path(args.model_out).write_text(model.dumps())
    print(json.dumps({"feature": args.feature, "classifier": args.classifier, "n_train": len(tr),
                      "n_test": len(te), "accuracy": acc, "ci_low": lo, "ci_high": hi}))


def cmd_regress(args):
    rows = _read_features(args.features)
    degree = args.degree or (2 if args.target == "theta" else 3)
    x = np.array([float(r["eph"]) for r in rows])
    y = np.array([float(r[args.target]) for r in rows])
    rng = np.random.default_rng(derive_seed(args.seed or 0, "cli/regress", 0))
    tr, te = split_indices(len(y), args.train_fraction, rng, y)
    model = fit_poly(x[tr], y[tr], degree)
    if args.model_out:
        Path(args.model_out).write_text(model.dumps())
    raw = model.predict(x[te])
    out = {"target": args.target, "degree": degree, "n_train": len(tr), "n_test": len(te),
           "r2": r2_score(raw, y[te]), "coefficients": [float(c) for c in model.coefficients]}
    if args.target == "theta":
        pred = predict_theta(model, x[te], int(y.min()), int(y.max()))
        err = np.abs(pred - y[te])
        out.update(exact_rate=float((err == 0).mean()), within1_rate=float((err <= 1).mean()))
    print(json.dumps(out))


def cmd_experiment(args):
    if not args.config:
        raise ValueError("--config is required")
    cfg = ExperimentConfig.load(args.config)
    cfg.scenario = args.scenario
    if args.seed is not None:
        cfg.master_seed = args.seed
    if args.workers is not None:
        cfg.workers = args.workers
    if args.out:
        cfg.output_dir = args.out
    if args.runs is not None:
        cfg.runs_per_cell = args.runs
    cfg = ExperimentConfig.from_dict(cfg.to_dict())  # re-validate overrides
    out = run_scenario(cfg).write(cfg.output_dir)
    print(json.dumps({"scenario": cfg.scenario, "output_dir": str(out)}))


COMMANDS = {
    "simulate": cmd_simulate,
    "filtration": cmd_filtration,
    "eph": cmd_eph,
    "features": cmd_features,
    "classify": cmd_classify,
    "regress": cmd_regress,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except Exception as exc:  # one parsable line instead of a traceback
        msg = str(exc).replace("\n", " ").replace('"', "'")
        print(f'error type={type(exc).__name__} message="{msg}"', file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
