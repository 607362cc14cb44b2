"""Experiment harness: repeated oracle-driven runs, metric curves, reports.

Each repetition takes a fresh stratified split and a fresh forest (seeded
``base_seed + repetition``), runs the query budget against the simulated
oracle, and snapshots test-set metrics at every iteration; iteration 0 is
the untouched unsupervised detector.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .active import QUERY_STRATEGIES, UPDATE_STRATEGIES, BudgetExhausted, Session
from .data import Dataset, SplitSpec, simulated_oracle, split
from .iforest import fit
from .metrics import average_precision, roc_auc

ALL_STRATEGY_PAIRS = [(q, u) for q in QUERY_STRATEGIES for u in UPDATE_STRATEGIES]

RAW_COLUMNS = [
    "dataset",
    "query_strategy",
    "update_strategy",
    "repetition",
    "iteration",
    "ap",
    "auc",
    "step_ms",
]


@dataclass
class ExperimentPlan:
    datasets: list[Dataset]
    strategy_grid: list[tuple[str, str]] = field(
        default_factory=lambda: list(ALL_STRATEGY_PAIRS)
    )
    n_queries: int = 25
    n_repetitions: int = 50
    n_trees: int = 100
    psi: int | None = None
    train_fraction: float = 0.5
    stratified: bool = True
    base_seed: int = 0

    def __post_init__(self):
        if self.n_queries < 0:
            raise ValueError("n_queries must be >= 0")
        if self.n_repetitions < 1:
            raise ValueError("n_repetitions must be >= 1")
        for q, u in self.strategy_grid:
            if q not in QUERY_STRATEGIES or u not in UPDATE_STRATEGIES:
                raise ValueError(f"unknown strategy pair ({q}, {u})")


@dataclass
class RunResult:
    dataset: str
    query_strategy: str
    update_strategy: str
    repetition: int
    seed: int
    ap: np.ndarray  # length n_queries + 1; index 0 is the unsupervised baseline
    auc: np.ndarray
    step_ms: np.ndarray  # same length; 0.0 at index 0 (no update happened)


def run_experiment(plan: ExperimentPlan) -> list[RunResult]:
    """Execute the full plan; results are ordered and reproducible.

    Datasets without labels are skipped with a console note. If a pool
    runs dry before the budget (tiny datasets), the remaining iterations
    repeat the final metrics so every curve has n_queries + 1 entries.
    """
    results: list[RunResult] = []
    for dataset in plan.datasets:
        if dataset.labels is None:
            print(f"skipping {dataset.name}: no labels for the simulated oracle")
            continue
        for rep in range(plan.n_repetitions):
            seed = plan.base_seed + rep
            train, test = split(
                dataset, SplitSpec(plan.train_fraction, seed, plan.stratified)
            )
            forest = fit(train.features, plan.n_trees, plan.psi, seed)
            test_leaves = forest.route(test.features)
            oracle = simulated_oracle(train)
            for q, u in plan.strategy_grid:
                session = Session(
                    forest,
                    train.features,
                    query_strategy=q,
                    update_strategy=u,
                    budget=plan.n_queries,
                )
                ap = np.empty(plan.n_queries + 1)
                auc = np.empty(plan.n_queries + 1)
                step_ms = np.zeros(plan.n_queries + 1)
                scores = session.scores_for_leaves(test_leaves)
                ap[0] = average_precision(scores, test.labels)
                auc[0] = roc_auc(scores, test.labels)
                for it in range(1, plan.n_queries + 1):
                    t0 = time.perf_counter()
                    try:
                        session.step(oracle)
                    except BudgetExhausted:
                        ap[it:] = ap[it - 1]
                        auc[it:] = auc[it - 1]
                        break
                    step_ms[it] = (time.perf_counter() - t0) * 1e3
                    scores = session.scores_for_leaves(test_leaves)
                    ap[it] = average_precision(scores, test.labels)
                    auc[it] = roc_auc(scores, test.labels)
                results.append(
                    RunResult(dataset.name, q, u, rep, seed, ap, auc, step_ms)
                )
    return results


def _fmt(x: float) -> str:
    return repr(float(x))


def emit_report(results: list[RunResult], outdir, plots: bool = False) -> dict:
    """Write raw per-iteration rows, per-iteration curves, and the aggregate
    table; returns the paths. Metric cells use full-precision repr so equal
    runs produce byte-identical files (step_ms is wall time and will differ).
    """
    if not results:
        raise ValueError("no results to report")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    results = sorted(
        results,
        key=lambda r: (r.dataset, r.query_strategy, r.update_strategy, r.repetition),
    )

    raw_path = outdir / "raw.csv"
    with raw_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RAW_COLUMNS)
        for r in results:
            for it in range(len(r.ap)):
                writer.writerow(
                    [
                        r.dataset,
                        r.query_strategy,
                        r.update_strategy,
                        r.repetition,
                        it,
                        _fmt(r.ap[it]),
                        _fmt(r.auc[it]),
                        _fmt(r.step_ms[it]),
                    ]
                )

    groups: dict[tuple, list[RunResult]] = {}
    for r in results:
        groups.setdefault((r.dataset, r.query_strategy, r.update_strategy), []).append(r)

    curves_path = outdir / "curves.csv"
    with curves_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "dataset",
                "query_strategy",
                "update_strategy",
                "iteration",
                "ap_mean",
                "ap_std",
                "auc_mean",
                "auc_std",
            ]
        )
        for (ds, q, u), runs in groups.items():
            ap = np.stack([r.ap for r in runs])
            auc = np.stack([r.auc for r in runs])
            for it in range(ap.shape[1]):
                writer.writerow(
                    [
                        ds,
                        q,
                        u,
                        it,
                        _fmt(ap[:, it].mean()),
                        _fmt(ap[:, it].std()),
                        _fmt(auc[:, it].mean()),
                        _fmt(auc[:, it].std()),
                    ]
                )

    aggregate_path = outdir / "aggregate.csv"
    with aggregate_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "dataset",
                "query_strategy",
                "update_strategy",
                "ap_grand_mean",
                "ap_final_mean",
                "auc_grand_mean",
                "auc_final_mean",
            ]
        )
        for (ds, q, u), runs in groups.items():
            ap = np.stack([r.ap for r in runs])
            auc = np.stack([r.auc for r in runs])
            writer.writerow(
                [
                    ds,
                    q,
                    u,
                    _fmt(ap.mean()),
                    _fmt(ap[:, -1].mean()),
                    _fmt(auc.mean()),
                    _fmt(auc[:, -1].mean()),
                ]
            )

    paths = {"raw": raw_path, "curves": curves_path, "aggregate": aggregate_path}
    if plots:
        paths["plot"] = _render_curves(groups, outdir / "curves.png")
    return paths


def _render_curves(groups: dict, path: Path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    datasets = sorted({key[0] for key in groups})
    fig, axes = plt.subplots(
        1, len(datasets), figsize=(5 * len(datasets), 4), squeeze=False
    )
    for ax, ds in zip(axes[0], datasets):
        for (d, q, u), runs in groups.items():
            if d != ds:
                continue
            ap = np.stack([r.ap for r in runs]).mean(axis=0)
            style = "-" if q == "most_anomalous" else "--"
            ax.plot(range(len(ap)), ap, style, label=f"{q}/{u}")
        ax.set_title(ds)
        ax.set_xlabel("iteration")
        ax.set_ylabel("test AP")
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


# -- complexity measurements -------------------------------------------------


def measure_update_cost(
    n_x_values=(1000, 10000),
    n_trees: int = 100,
    psi: int = 256,
    n_updates: int = 200,
    seed: int = 0,
) -> dict[int, float]:
    """Median seconds per label update at each dataset size.

    The update touches one leaf per tree, so the cost should not scale with
    the dataset size (fit does; that is not measured here).
    """
    out = {}
    rng = np.random.default_rng(seed)
    for n_x in n_x_values:
        X = rng.normal(size=(n_x, 8))
        forest = fit(X, n_trees=n_trees, psi=psi, seed=seed)
        session = Session(forest, X, budget=n_updates)
        indices = rng.choice(n_x, size=n_updates, replace=False)
        labels = rng.integers(0, 2, size=n_updates)
        times = np.empty(n_updates)
        for i, (idx, lab) in enumerate(zip(indices, labels)):
            t0 = time.perf_counter()
            session.label_point(int(idx), int(lab))
            times[i] = time.perf_counter() - t0
        out[int(n_x)] = float(np.median(times))
    return out


def measure_query_cost(
    sizes=((1000, 25), (2000, 50), (4000, 100), (16000, 100), (32000, 100)),
    psi: int = 256,
    repeats: int = 9,
    seed: int = 0,
) -> list[tuple[int, float]]:
    """Median seconds for one depth-matrix build plus query selection at each
    (pool size, tree count); returns (n_pool * n_trees, seconds) points.
    """
    points = []
    rng = np.random.default_rng(seed)
    for n_pool, n_trees in sizes:
        X = rng.normal(size=(n_pool, 8))
        forest = fit(X, n_trees=n_trees, psi=min(psi, n_pool), seed=seed)
        session = Session(forest, X, budget=1)
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            dm = session.depth_matrix()
            session.select_query(dm)
            times.append(time.perf_counter() - t0)
        points.append((n_pool * n_trees, float(np.median(times))))
    return points


def loglog_slope(points) -> float:
    """Least-squares slope of log(time) against log(work)."""
    x = np.log([p[0] for p in points])
    y = np.log([p[1] for p in points])
    return float(np.polyfit(x, y, 1)[0])
