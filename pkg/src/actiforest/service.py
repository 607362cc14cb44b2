"""HTTP session API for human-in-the-loop labeling.

The loop is strictly sequential per session: one outstanding query at a
time, label application is atomic with respect to score reads. Sessions
persist as an event log plus a checkpoint after every label, so a restart
reproduces scores bit-exactly.

Environment: ACTIFOREST_DATA_DIR (persistence root), ACTIFOREST_TOKEN
(shared auth token, optional), ACTIFOREST_BIND (serve address).
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from pathlib import Path
from typing import Literal

import numpy as np
from fastapi import Depends, FastAPI, HTTPException, Request
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .active import Session
from .data import Dataset, load_csv, make_toroid, save_csv
from .iforest import Forest, fit, score_from_depth
from .metrics import average_precision, roc_auc

STATUS_IDLE = "idle"
STATUS_AWAITING = "awaiting_label"
STATUS_EXHAUSTED = "budget_exhausted"


class ToroidSpec(BaseModel):
    n_normal: int = 1000
    n_anomaly: int = 50
    seed: int | None = None


class DatasetPayload(BaseModel):
    features: list[list[float]] | None = None
    labels: list[int] | None = None
    name: str = "dataset"
    toroid: ToroidSpec | None = None
    path: str | None = None


class ForestConfig(BaseModel):
    n_trees: int = 100
    psi: int | None = None
    seed: int | None = None
    query_strategy: Literal["most_anomalous", "max_uncertainty"] = "most_anomalous"
    update_strategy: Literal["piecewise_linear", "logarithmic"] = "piecewise_linear"
    budget: int = Field(default=25, ge=0)


class SessionCreate(BaseModel):
    dataset: DatasetPayload
    eval: DatasetPayload | None = None
    config: ForestConfig = ForestConfig()


class LabelPayload(BaseModel):
    point_index: int
    label: Literal["normal", "anomaly"] | None = None
    abstain: bool = False


class SessionResource:
    """Server-side state for one labeling session."""

    def __init__(
        self,
        session_id: str,
        train: Dataset,
        session: Session,
        eval_set: Dataset | None,
        eval_leaves: np.ndarray | None,
        root: Path | None,
    ):
        self.id = session_id
        self.train = train
        self.session = session
        self.eval_set = eval_set
        self.eval_leaves = eval_leaves
        self.root = root
        self.outstanding: int | None = None
        self.created = time.time()
        self.updated = self.created
        self.lock = threading.Lock()

    @property
    def status(self) -> str:
        if self.session.budget_left <= 0 or self.session.pool_size == 0:
            return STATUS_EXHAUSTED
        if self.outstanding is not None:
            return STATUS_AWAITING
        return STATUS_IDLE

    def snapshot_metrics(self) -> dict | None:
        if self.eval_set is None or self.eval_set.labels is None:
            return None
        scores = self.session.scores_for_leaves(self.eval_leaves)
        return {
            "ap": average_precision(scores, self.eval_set.labels),
            "auc": roc_auc(scores, self.eval_set.labels),
        }

    # -- persistence ------------------------------------------------------

    def log_event(self, kind: str, payload: dict) -> None:
        if self.root is None:
            return
        with (self.root / "events.jsonl").open("a") as fh:
            fh.write(json.dumps({"ts": time.time(), "event": kind, **payload}) + "\n")

    def persist_state(self) -> None:
        if self.root is None:
            return
        self.session.save_checkpoint(self.root / "checkpoint.json", model_ref="model.json")
        (self.root / "state.json").write_text(
            json.dumps({"outstanding": self.outstanding})
        )


def _percentiles_of(train_features: np.ndarray, x: np.ndarray) -> list[float]:
    # Fraction of training values at or below each feature of x.
    n = train_features.shape[0]
    return [
        float(np.count_nonzero(train_features[:, j] <= x[j]) / n)
        for j in range(train_features.shape[1])
    ]


def create_app(
    data_dir: str | None = None,
    token: str | None = None,
    max_upload_points: int = 200_000,
) -> FastAPI:
    data_dir = data_dir or os.environ.get("ACTIFOREST_DATA_DIR")
    token = token if token is not None else os.environ.get("ACTIFOREST_TOKEN")
    root = Path(data_dir) if data_dir else None
    if root:
        root.mkdir(parents=True, exist_ok=True)

    app = FastAPI(title="actiforest session API")
    sessions: dict[str, SessionResource] = {}
    registry_lock = threading.Lock()

    def check_auth(request: Request) -> None:
        if token and request.headers.get("x-auth-token") != token:
            raise HTTPException(status_code=401, detail="missing or bad auth token")

    auth = Depends(check_auth)

    # -- helpers -----------------------------------------------------------

    def resolve_dataset(payload: DatasetPayload, require_labels: bool) -> Dataset:
        if payload.toroid is not None:
            t = payload.toroid
            return make_toroid(t.n_normal, t.n_anomaly, seed=t.seed)
        if payload.path is not None:
            if root is None:
                raise HTTPException(400, "server has no data directory configured")
            target = (root / payload.path).resolve()
            if not str(target).startswith(str(root.resolve())):
                raise HTTPException(400, "path escapes the data directory")
            try:
                return load_csv(target, label_column="label")
            except FileNotFoundError:
                raise HTTPException(422, f"no such dataset file: {payload.path}")
            except ValueError as exc:
                raise HTTPException(422, f"unparseable dataset: {exc}")
        if payload.features is None:
            raise HTTPException(422, "dataset needs features, a toroid spec, or a path")
        if len(payload.features) > max_upload_points:
            raise HTTPException(413, "dataset upload exceeds the size limit")
        try:
            return Dataset(
                np.asarray(payload.features, dtype=np.float64),
                payload.labels,
                name=payload.name,
            )
        except ValueError as exc:
            raise HTTPException(422, f"unparseable dataset: {exc}")

    def _load_saved_csv(path: Path) -> Dataset:
        with path.open() as fh:
            has_label = fh.readline().strip().split(",")[-1] == "label"
        return load_csv(path, label_column="label" if has_label else None)

    def load_from_disk(session_id: str) -> SessionResource | None:
        if root is None:
            return None
        sdir = root / session_id
        if not (sdir / "checkpoint.json").exists():
            return None
        forest = Forest.load(sdir / "model.json")
        train = _load_saved_csv(sdir / "train.csv")
        ckpt = json.loads((sdir / "checkpoint.json").read_text())
        session = Session.from_checkpoint(forest, train.features, ckpt)
        eval_set = None
        eval_leaves = None
        if (sdir / "eval.csv").exists():
            eval_set = _load_saved_csv(sdir / "eval.csv")
            eval_leaves = forest.route(eval_set.features)
        res = SessionResource(session_id, train, session, eval_set, eval_leaves, sdir)
        state = json.loads((sdir / "state.json").read_text())
        res.outstanding = state.get("outstanding")
        return res

    def get_resource(session_id: str) -> SessionResource:
        with registry_lock:
            res = sessions.get(session_id)
            if res is None:
                res = load_from_disk(session_id)
                if res is not None:
                    sessions[session_id] = res
        if res is None:
            raise HTTPException(404, f"unknown session {session_id}")
        return res

    # -- endpoints ----------------------------------------------------------

    @app.post("/sessions", status_code=201, dependencies=[auth])
    def create_session(body: SessionCreate):
        train = resolve_dataset(body.dataset, require_labels=False)
        cfg = body.config
        if cfg.psi is not None and cfg.psi > train.n_points:
            raise HTTPException(
                400, f"psi ({cfg.psi}) cannot exceed the dataset size ({train.n_points})"
            )
        try:
            forest = fit(train.features, n_trees=cfg.n_trees, psi=cfg.psi, seed=cfg.seed)
        except ValueError as exc:
            raise HTTPException(400, str(exc))
        session = Session(
            forest,
            train.features,
            query_strategy=cfg.query_strategy,
            update_strategy=cfg.update_strategy,
            budget=cfg.budget,
        )
        eval_set = None
        eval_leaves = None
        if body.eval is not None:
            eval_set = resolve_dataset(body.eval, require_labels=True)
            if eval_set.labels is None:
                raise HTTPException(422, "eval dataset needs labels for metric snapshots")
            if eval_set.n_features != train.n_features:
                raise HTTPException(400, "eval feature count does not match the dataset")
            eval_leaves = forest.route(eval_set.features)

        session_id = uuid.uuid4().hex
        sdir = None
        if root is not None:
            sdir = root / session_id
            sdir.mkdir(parents=True)
            forest.save(sdir / "model.json")
            save_csv(train, sdir / "train.csv")
            if eval_set is not None:
                save_csv(eval_set, sdir / "eval.csv")
            (sdir / "config.json").write_text(cfg.model_dump_json())
        res = SessionResource(session_id, train, session, eval_set, eval_leaves, sdir)
        with registry_lock:
            sessions[session_id] = res
        scores = session.train_scores()
        baseline = {
            "n_train": train.n_points,
            "n_features": train.n_features,
            "n_trees": forest.n_trees,
            "psi": forest.psi,
            "c_psi": forest.c_psi,
            "top_score": float(scores.max()),
            "mean_score": float(scores.mean()),
        }
        metrics = res.snapshot_metrics()
        if metrics is not None:
            baseline["metrics"] = metrics
        res.log_event("created", {"config": cfg.model_dump(), "baseline": baseline})
        res.persist_state()
        return {"session_id": session_id, "status": res.status, "baseline": baseline}

    def query_card(res: SessionResource, index: int) -> dict:
        """Everything the labeler sees for one queried point. Pure function of
        the current session state, so a page refresh can rebuild it."""
        dm = res.session.depth_matrix()
        row = int(np.flatnonzero(dm.indices == index)[0])
        depths = dm.values[row]
        means = dm.values.mean(axis=1)
        return {
            "point_index": index,
            "features": [float(v) for v in res.train.features[index]],
            "score": float(score_from_depth(means[row], res.session.forest.c_psi)),
            "mean_depth": float(means[row]),
            "uncertainty": float(depths.std()),
            "rank": int(np.count_nonzero(means < means[row]) + 1),
            "pool_size": res.session.pool_size,
            "budget_left": res.session.budget_left,
            "feature_percentiles": _percentiles_of(
                res.train.features, res.train.features[index]
            ),
        }

    @app.get("/sessions/{session_id}", dependencies=[auth])
    def session_summary(session_id: str):
        res = get_resource(session_id)
        with res.lock:
            summary = {
                "session_id": res.id,
                "status": res.status,
                "budget": res.session.budget,
                "budget_used": len(res.session.history),
                "pool_size": res.session.pool_size,
                "n_train": res.session.n_train,
                "n_features": res.train.n_features,
                "query_strategy": res.session.query_strategy,
                "update_strategy": res.session.update_strategy,
                "outstanding": res.outstanding,
                "has_eval": res.eval_set is not None,
            }
            if res.outstanding is not None:
                summary["outstanding_query"] = query_card(res, res.outstanding)
            metrics = res.snapshot_metrics()
            if metrics is not None:
                summary["metrics"] = metrics
            return summary

    @app.post("/sessions/{session_id}/query", dependencies=[auth])
    def next_query(session_id: str):
        res = get_resource(session_id)
        with res.lock:
            if res.outstanding is not None:
                raise HTTPException(409, "a query is already outstanding")
            if res.session.budget_left <= 0 or res.session.pool_size == 0:
                raise HTTPException(410, "query budget exhausted")
            index = res.session.select_query()
            res.outstanding = index
            res.updated = time.time()
            payload = {"status": res.status, **query_card(res, index)}
            res.log_event("query", {"point_index": index})
            res.persist_state()
            return payload

    @app.post("/sessions/{session_id}/labels", dependencies=[auth])
    def submit_label(session_id: str, body: LabelPayload):
        res = get_resource(session_id)
        with res.lock:
            if res.outstanding is None:
                raise HTTPException(409, "no outstanding query to label")
            if body.point_index != res.outstanding:
                raise HTTPException(
                    409,
                    f"label for point {body.point_index} does not match the "
                    f"outstanding query {res.outstanding}",
                )
            if body.abstain:
                res.outstanding = None
                res.updated = time.time()
                res.log_event("abstain", {"point_index": body.point_index})
                res.persist_state()
                return {
                    "status": res.status,
                    "point_index": body.point_index,
                    "abstained": True,
                    "budget_left": res.session.budget_left,
                }
            if body.label is None:
                raise HTTPException(422, "label required unless abstaining")
            session = res.session
            index = body.point_index
            previous_score = float(session.anomaly_score(res.train.features[index]))
            touched = session.label_point(index, body.label)
            # locality diagnostic: training points sharing >= 1 touched leaf
            rescored = int(
                np.count_nonzero(np.isin(session.train_leaves, touched).any(axis=1))
            )
            record = {
                "iteration": len(session.history) + 1,
                "index": index,
                "label": body.label,
            }
            metrics = res.snapshot_metrics()
            if metrics is not None:
                record["metrics"] = metrics
            session.history.append(record)
            res.outstanding = None
            res.updated = time.time()
            new_score = float(session.anomaly_score(res.train.features[index]))
            res.log_event("label", record)
            res.persist_state()
            payload = {
                "status": res.status,
                "point_index": index,
                "label": body.label,
                "previous_score": previous_score,
                "new_score": new_score,
                "rescored_points": rescored,
                "budget_left": session.budget_left,
            }
            if metrics is not None:
                payload["metrics"] = metrics
            return payload

    @app.get("/sessions/{session_id}/scores", dependencies=[auth])
    def ranked_scores(session_id: str, top: int | None = None, features: bool = False):
        res = get_resource(session_id)
        with res.lock:
            scores = res.session.train_scores()
            order = np.lexsort((np.arange(len(scores)), -scores))
            if top is not None:
                order = order[: max(int(top), 0)]
            entries = []
            for i in order:
                entry = {
                    "index": int(i),
                    "score": float(scores[i]),
                    "labeled": bool(res.session.is_labeled(int(i))),
                }
                if features:
                    entry["features"] = [float(v) for v in res.train.features[i]]
                entries.append(entry)
            return {"status": res.status, "scores": entries}

    @app.get("/sessions/{session_id}/history", dependencies=[auth])
    def history(session_id: str):
        res = get_resource(session_id)
        with res.lock:
            entries = list(res.session.history)
        out = {"status": res.status, "entries": entries}
        if res.eval_set is not None:
            # Baseline = untouched forest, recomputed from unsupervised depths.
            base = res.session.forest.leaf_base[res.eval_leaves].mean(axis=1)
            scores = score_from_depth(base, res.session.forest.c_psi)
            out["baseline_metrics"] = {
                "ap": average_precision(scores, res.eval_set.labels),
                "auc": roc_auc(scores, res.eval_set.labels),
            }
        return out

    ui_dir = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if not ui_dir.exists():
        ui_dir = Path(os.environ.get("ACTIFOREST_UI_DIR", "frontend/dist"))
    if ui_dir.exists():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
