"""Command-line interface: fit, score, simulate, bench, gen-toroid, serve.

Exit codes: 0 success, 1 data/runtime error, 2 usage error (argparse).
All randomness flows from --seed; when omitted a seed is drawn from entropy
and printed so the run can be reproduced.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .active import QUERY_STRATEGIES, UPDATE_STRATEGIES, effective_depths_from_checkpoint
from .bench import ALL_STRATEGY_PAIRS, ExperimentPlan, emit_report, run_experiment
from .data import Dataset, load_csv, make_toroid, save_csv
from .iforest import Forest, fit, score_from_depth


def _resolve_seed(seed: int | None) -> int:
    if seed is None:
        seed = int(np.random.SeedSequence().entropy % (2**32))
        print(f"seed: {seed} (chosen from entropy; pass --seed {seed} to reproduce)")
    return seed


def _label_col(value: str | None):
    if value is None:
        return None
    try:
        return int(value)
    except ValueError:
        return value


def _describe(dataset: Dataset) -> str:
    parts = [f"{dataset.n_points} points", f"{dataset.n_features} features"]
    if dataset.contamination is not None:
        parts.append(f"contamination {dataset.contamination:.4f}")
    return f"{dataset.name}: " + ", ".join(parts)


def cmd_fit(args) -> int:
    dataset = load_csv(args.data, label_column=_label_col(args.label_col))
    print(_describe(dataset))
    seed = _resolve_seed(args.seed)
    forest = fit(dataset.features, n_trees=args.trees, psi=args.psi, seed=seed)
    forest.save(args.out)
    print(f"model written to {args.out}")
    print(f"n_trees: {forest.n_trees}")
    print(f"psi: {forest.psi}")
    print(f"c_psi: {forest.c_psi!r}")
    print(
        "per-tree depth range: "
        f"h_min in [{forest.h_min.min():.3f}, {forest.h_min.max():.3f}], "
        f"h_max in [{forest.h_max.min():.3f}, {forest.h_max.max():.3f}]"
    )
    return 0


def cmd_score(args) -> int:
    forest = Forest.load(args.model)
    dataset = load_csv(args.data, label_column=_label_col(args.label_col))
    if dataset.n_features != forest.n_features:
        print(
            f"error: model expects {forest.n_features} features, "
            f"data has {dataset.n_features}",
            file=sys.stderr,
        )
        return 1
    if args.session:
        ckpt = json.loads(Path(args.session).read_text())
        eff = effective_depths_from_checkpoint(forest, ckpt)
    else:
        eff = forest.leaf_base
    depths = eff[forest.route(dataset.features)].mean(axis=1)
    scores = score_from_depth(depths, forest.c_psi)
    order = np.lexsort((np.arange(len(scores)), -scores)) if args.ranked else np.arange(
        len(scores)
    )
    with open(args.out, "w") as fh:
        fh.write("index,score\n")
        for i in order:
            fh.write(f"{i},{float(scores[i])!r}\n")
    print(f"scores for {len(scores)} points written to {args.out}")
    return 0


def cmd_simulate(args) -> int:
    dataset = load_csv(args.data, label_column=_label_col(args.label_col))
    if dataset.labels is None:
        print("error: simulate needs a labeled dataset (--label-col)", file=sys.stderr)
        return 1
    print(_describe(dataset))
    seed = _resolve_seed(args.seed)
    plan = ExperimentPlan(
        datasets=[dataset],
        strategy_grid=[(args.query_strategy, args.update_strategy)],
        n_queries=args.queries,
        n_repetitions=args.reps,
        n_trees=args.trees,
        psi=args.psi,
        train_fraction=args.train_fraction,
        stratified=not args.plain_split,
        base_seed=seed,
    )
    results = run_experiment(plan)
    paths = emit_report(results, args.out, plots=args.plots)
    for kind, path in paths.items():
        print(f"{kind}: {path}")
    return 0


def cmd_bench(args) -> int:
    plan = load_plan(args.plan)
    results = run_experiment(plan)
    paths = emit_report(results, args.out, plots=args.plots)
    for kind, path in paths.items():
        print(f"{kind}: {path}")
    return 0


def cmd_gen_toroid(args) -> int:
    seed = _resolve_seed(args.seed)
    dataset = make_toroid(args.normal, args.anomaly, seed=seed)
    save_csv(dataset, args.out)
    print(
        f"toroid dataset written to {args.out} "
        f"({dataset.n_points} points, contamination {dataset.contamination:.4f})"
    )
    return 0


def cmd_serve(args) -> int:
    import os

    import uvicorn

    from .service import create_app

    host = args.host or os.environ.get("ACTIFOREST_BIND", "127.0.0.1")
    app = create_app(data_dir=args.data_dir, token=args.token)
    uvicorn.run(app, host=host, port=args.port, log_level="info")
    return 0


def load_plan(path) -> ExperimentPlan:
    """Read a bench plan document (JSON): datasets, strategies, budget, seeds."""
    doc = json.loads(Path(path).read_text())
    datasets: list[Dataset] = []
    for entry in doc["datasets"]:
        if "toroid" in entry:
            t = entry["toroid"]
            ds = make_toroid(t["n_normal"], t["n_anomaly"], seed=t.get("seed"))
        elif "path" in entry:
            ds = load_csv(
                entry["path"],
                label_column=_label_col(entry.get("label_col")),
                name=entry.get("name"),
            )
        else:
            raise ValueError(f"dataset entry needs 'toroid' or 'path': {entry}")
        if "name" in entry:
            ds.name = entry["name"]
        datasets.append(ds)
    strategies = doc.get("strategies", "all")
    grid = (
        list(ALL_STRATEGY_PAIRS)
        if strategies == "all"
        else [tuple(pair) for pair in strategies]
    )
    return ExperimentPlan(
        datasets=datasets,
        strategy_grid=grid,
        n_queries=doc.get("n_queries", 25),
        n_repetitions=doc.get("n_repetitions", 50),
        n_trees=doc.get("n_trees", 100),
        psi=doc.get("psi"),
        train_fraction=doc.get("train_fraction", 0.5),
        stratified=doc.get("stratified", True),
        base_seed=doc.get("base_seed", 0),
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="actiforest",
        description="Isolation-forest anomaly detection with active-learning "
        "leaf-depth updates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="train an unsupervised forest")
    p.add_argument("--data", required=True)
    p.add_argument("--label-col", default=None, help="ignored for training, split off")
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--psi", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("score", help="score points with a model (+ session overlay)")
    p.add_argument("--model", required=True)
    p.add_argument("--session", default=None, help="session checkpoint file")
    p.add_argument("--data", required=True)
    p.add_argument("--label-col", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--ranked", action="store_true", help="emit rows in descending score order")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("simulate", help="oracle-driven active-learning runs")
    p.add_argument("--data", required=True)
    p.add_argument("--label-col", required=True)
    p.add_argument("--queries", type=int, default=25)
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--query-strategy", choices=QUERY_STRATEGIES, default="most_anomalous")
    p.add_argument("--update-strategy", choices=UPDATE_STRATEGIES, default="piecewise_linear")
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--psi", type=int, default=None)
    p.add_argument("--train-fraction", type=float, default=0.5)
    p.add_argument("--plain-split", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--plots", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="run an experiment plan file")
    p.add_argument("--plan", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--plots", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen-toroid", help="generate the square-ring benchmark dataset")
    p.add_argument("--normal", type=int, default=1000)
    p.add_argument("--anomaly", type=int, default=50)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_toroid)

    p = sub.add_parser("serve", help="start the HTTP labeling service")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--data-dir", default=None)
    p.add_argument("--token", default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
