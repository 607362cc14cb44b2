"""Active-learning overlay on a fitted isolation forest.

A :class:`Session` keeps per-leaf label counts and replaces the depths of
touched leaves with a supervised value derived from the leaf's label mix
(its "color"): anomalous leaves move toward the tree's shallowest path
length, normal leaves toward its deepest. Untouched leaves keep their
unsupervised depth, so one label costs one root-to-leaf walk per tree and
nothing is retrained.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .iforest import Forest, score_from_depth

NORMAL = 0
ANOMALY = 1
LABEL_NAMES = {NORMAL: "normal", ANOMALY: "anomaly"}

QUERY_MOST_ANOMALOUS = "most_anomalous"
QUERY_MAX_UNCERTAINTY = "max_uncertainty"
QUERY_STRATEGIES = (QUERY_MOST_ANOMALOUS, QUERY_MAX_UNCERTAINTY)

UPDATE_LINEAR = "piecewise_linear"
UPDATE_LOG = "logarithmic"
UPDATE_STRATEGIES = (UPDATE_LINEAR, UPDATE_LOG)


class BudgetExhausted(RuntimeError):
    """No labeling step is possible: budget spent or pool empty."""


class AlreadyLabeled(ValueError):
    """A point may only be queried once per session."""


def parse_label(value) -> int:
    if isinstance(value, str):
        token = value.strip().lower()
        if token in ("normal", "0"):
            return NORMAL
        if token in ("anomaly", "1"):
            return ANOMALY
        raise ValueError(f"invalid label {value!r}; expected 'normal' or 'anomaly'")
    if value in (NORMAL, ANOMALY):
        return int(value)
    raise ValueError(f"invalid label {value!r}; expected 0 or 1")


def _check_strategy(value: str, allowed: tuple, kind: str) -> str:
    if value not in allowed:
        raise ValueError(f"unknown {kind} strategy {value!r}; valid: {', '.join(allowed)}")
    return value


def leaf_color(n_outlier: int, n_inlier: int) -> float:
    """Label mix of a leaf in [0, 1]: the fraction of labeled anomalies.

    Equals (1/2)((L_o - L_i)/(L_o + L_i) + 1) and is computed as the direct
    fraction L_o/(L_o + L_i). Undefined for untouched leaves.
    """
    if n_outlier < 0 or n_inlier < 0:
        raise ValueError("label counts cannot be negative")
    total = n_outlier + n_inlier
    if total < 1:
        raise ValueError("leaf color is undefined without labeled points")
    return n_outlier / total


def _clamp_c(c_psi: float, h_min: float, h_max: float) -> float:
    # On shallow trees c(psi) may fall outside the representable depth range;
    # saturating it keeps the supervised depth monotone and bounded.
    return min(max(c_psi, h_min), h_max)


def supervised_depth_linear(k: float, c_psi: float, h_min: float, h_max: float) -> float:
    """Piece-wise linear supervised depth: h_max at k=0, c(psi) at 1/2, h_min at 1."""
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"leaf color must be in [0, 1], got {k}")
    if h_min > h_max:
        raise ValueError("h_min cannot exceed h_max")
    c = _clamp_c(c_psi, h_min, h_max)
    if k < 0.5:
        return 2.0 * k * (c - h_max) + h_max
    return 2.0 * k * (h_min - c) + 2.0 * c - h_min


def supervised_depth_log(k: float, c_psi: float, h_min: float, h_max: float) -> float:
    """Logarithmic supervised depth -c(psi)*log2(k), saturated to [h_min, h_max]."""
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"leaf color must be in [0, 1], got {k}")
    if h_min > h_max:
        raise ValueError("h_min cannot exceed h_max")
    c = _clamp_c(c_psi, h_min, h_max)
    if k <= 0.0:
        return h_max
    return min(max(-c * math.log2(k), h_min), h_max)


def _supervised_depth_array(
    k: np.ndarray,
    c: np.ndarray,
    h_min: np.ndarray,
    h_max: np.ndarray,
    strategy: str,
) -> np.ndarray:
    # Vector twin of the scalar functions; c arrives pre-clamped per tree.
    if strategy == UPDATE_LINEAR:
        low = 2.0 * k * (c - h_max) + h_max
        high = 2.0 * k * (h_min - c) + 2.0 * c - h_min
        return np.where(k < 0.5, low, high)
    with np.errstate(divide="ignore"):
        raw = -c * np.log2(k)
    return np.clip(raw, h_min, h_max)


@dataclass
class DepthMatrix:
    """Effective path lengths of the unlabeled pool: one row per point,
    one column per tree, rows ordered by ascending pool index."""

    values: np.ndarray
    indices: np.ndarray


class Session:
    """One active-learning run over a fitted forest and its training data.

    Labeling is serialized through an internal lock and applied atomically:
    readers (scores, depth matrix) always observe all trees pre- or
    post-update, never a mix.
    """

    def __init__(
        self,
        forest: Forest,
        X_train,
        *,
        query_strategy: str = QUERY_MOST_ANOMALOUS,
        update_strategy: str = UPDATE_LINEAR,
        budget: int = 25,
    ):
        if budget < 0:
            raise ValueError(f"budget must be >= 0, got {budget}")
        self.forest = forest
        self.X = forest._check_features(np.asarray(X_train, dtype=np.float64))
        self.query_strategy = _check_strategy(query_strategy, QUERY_STRATEGIES, "query")
        self.update_strategy = _check_strategy(update_strategy, UPDATE_STRATEGIES, "update")
        self.budget = int(budget)

        self.n_train = self.X.shape[0]
        # Partitions never change after fit, so pool routing is cached once.
        self.train_leaves = forest.route(self.X)

        n_leaves = forest.n_leaves
        self.eff_depth = forest.leaf_base.copy()
        self.n_inlier = np.zeros(n_leaves, dtype=np.int64)
        self.n_outlier = np.zeros(n_leaves, dtype=np.int64)

        tree = forest.leaf_tree
        c_tree = np.clip(forest.c_psi, forest.h_min, forest.h_max)
        self.c_clamped_trees = int(np.count_nonzero(c_tree != forest.c_psi))
        self._leaf_c = c_tree[tree]
        self._leaf_h_min = forest.h_min[tree]
        self._leaf_h_max = forest.h_max[tree]

        self._pool_mask = np.ones(self.n_train, dtype=bool)
        self.labeled: list[tuple[int, int]] = []
        self.history: list[dict] = []
        self._lock = threading.RLock()

    # -- state ------------------------------------------------------------

    @property
    def pool(self) -> np.ndarray:
        """Unlabeled point indices, ascending."""
        return np.flatnonzero(self._pool_mask)

    @property
    def pool_size(self) -> int:
        return int(self._pool_mask.sum())

    @property
    def budget_left(self) -> int:
        return self.budget - len(self.history)

    def is_labeled(self, index: int) -> bool:
        return not bool(self._pool_mask[index])

    # -- update strategy ---------------------------------------------------

    def label_point(self, index: int, label) -> np.ndarray:
        """Apply one trusted label: re-color the touched leaf of every tree
        and replace its depth with the supervised value.

        Returns the global leaf slots that were updated (one per tree).

        Raises:
            AlreadyLabeled: if the point left the pool earlier.
        """
        label = parse_label(label)
        index = int(index)
        if not 0 <= index < self.n_train:
            raise IndexError(f"point index {index} out of range")
        with self._lock:
            if not self._pool_mask[index]:
                raise AlreadyLabeled(f"point {index} was already labeled")
            # One root-to-leaf traversal per tree; nothing else is touched.
            leaves = self.forest.route(self.X[index : index + 1])[0].astype(np.int64)
            if label == ANOMALY:
                self.n_outlier[leaves] += 1
            else:
                self.n_inlier[leaves] += 1
            totals = self.n_outlier[leaves] + self.n_inlier[leaves]
            k = self.n_outlier[leaves] / totals
            self.eff_depth[leaves] = _supervised_depth_array(
                k,
                self._leaf_c[leaves],
                self._leaf_h_min[leaves],
                self._leaf_h_max[leaves],
                self.update_strategy,
            )
            self._pool_mask[index] = False
            self.labeled.append((index, label))
            return leaves

    # -- query strategy ----------------------------------------------------

    def effective_path_length(self, tree_index: int, x) -> float:
        """Supervised depth if the leaf was touched, unsupervised otherwise."""
        return float(self.eff_depth[self.forest.leaf_for(tree_index, x)])

    def depth_matrix(self) -> DepthMatrix:
        """Effective path lengths of every pool point across all trees.

        Raises:
            BudgetExhausted: if the pool is empty.
        """
        with self._lock:
            pool = self.pool
            if pool.size == 0:
                raise BudgetExhausted("unlabeled pool is empty")
            return DepthMatrix(self.eff_depth[self.train_leaves[pool]], pool)

    def select_query(self, dm: DepthMatrix | None = None) -> int:
        """Pick the next point to label.

        most_anomalous minimizes the row mean of the depth matrix (highest
        score); max_uncertainty maximizes the row standard deviation (trees
        disagree most). Ties go to the lowest pool index.
        """
        if dm is None:
            dm = self.depth_matrix()
        H = dm.values
        if self.query_strategy == QUERY_MOST_ANOMALOUS:
            j = int(np.argmin(H.mean(axis=1)))
        else:
            j = int(np.argmax(H.std(axis=1)))
        return int(dm.indices[j])

    def step(self, oracle, snapshot=None):
        """Run one loop iteration: select a query, obtain its label, update.

        ``oracle(index)`` returns 0/1, or None to abstain (the step aborts
        and the session is unchanged). ``snapshot(session)``, when given,
        is called after the update and its result lands in the history
        record. Returns (index, label) or None on abstention.

        Raises:
            BudgetExhausted: when the budget is spent or the pool is empty.
        """
        with self._lock:
            if len(self.history) >= self.budget:
                raise BudgetExhausted("query budget exhausted")
            dm = self.depth_matrix()
            index = self.select_query(dm)
            label = oracle(index)
            if label is None:
                return None
            label = parse_label(label)
            self.label_point(index, label)
            record = {
                "iteration": len(self.history) + 1,
                "index": index,
                "label": LABEL_NAMES[label],
            }
            if snapshot is not None:
                record["metrics"] = snapshot(self)
            self.history.append(record)
            return index, label

    # -- scoring -----------------------------------------------------------

    def path_lengths(self, X) -> np.ndarray:
        """Effective path lengths of arbitrary points, shape (n, n_trees)."""
        with self._lock:
            return self.eff_depth[self.forest.route(X)]

    def anomaly_scores(self, X) -> np.ndarray:
        return score_from_depth(self.path_lengths(X).mean(axis=1), self.forest.c_psi)

    def anomaly_score(self, x) -> float:
        return float(self.anomaly_scores(np.asarray(x, dtype=np.float64)[None, :])[0])

    def scores_for_leaves(self, leaf_matrix: np.ndarray) -> np.ndarray:
        """Scores for points pre-routed with ``forest.route`` (fixed eval sets)."""
        with self._lock:
            depths = self.eff_depth[leaf_matrix]
        return score_from_depth(depths.mean(axis=1), self.forest.c_psi)

    def train_scores(self) -> np.ndarray:
        """Current scores of all training points (labeled and pool)."""
        return self.scores_for_leaves(self.train_leaves)

    # -- persistence -------------------------------------------------------

    def to_checkpoint(self, model_ref: str | None = None) -> dict:
        with self._lock:
            touched = np.flatnonzero(self.n_inlier + self.n_outlier > 0)
            tree_starts = self._tree_leaf_starts()
            records = [
                [
                    int(self.forest.leaf_tree[g]),
                    int(g - tree_starts[self.forest.leaf_tree[g]]),
                    int(self.n_inlier[g]),
                    int(self.n_outlier[g]),
                    float(self.eff_depth[g]),
                ]
                for g in touched
            ]
            return {
                "format": "actiforest-session",
                "version": 1,
                "model": model_ref,
                "query_strategy": self.query_strategy,
                "update_strategy": self.update_strategy,
                "budget": self.budget,
                "n_train": self.n_train,
                "labeled": [[int(i), int(l)] for i, l in self.labeled],
                "history": self.history,
                "touched_leaves": records,
            }

    def _tree_leaf_starts(self) -> np.ndarray:
        counts = np.bincount(self.forest.leaf_tree, minlength=self.forest.n_trees)
        starts = np.zeros(self.forest.n_trees, dtype=np.int64)
        np.cumsum(counts[:-1], out=starts[1:])
        return starts

    @classmethod
    def from_checkpoint(cls, forest: Forest, X_train, ckpt: dict) -> "Session":
        if ckpt.get("format") != "actiforest-session":
            raise ValueError("not a session checkpoint document")
        session = cls(
            forest,
            X_train,
            query_strategy=ckpt["query_strategy"],
            update_strategy=ckpt["update_strategy"],
            budget=ckpt["budget"],
        )
        if session.n_train != ckpt["n_train"]:
            raise ValueError("checkpoint does not match the training data size")
        starts = session._tree_leaf_starts()
        for tree_id, leaf_id, n_in, n_out, depth in ckpt["touched_leaves"]:
            g = int(starts[tree_id] + leaf_id)
            if session.forest.leaf_tree[g] != tree_id:
                raise ValueError("checkpoint leaf ids do not match the model")
            session.n_inlier[g] = n_in
            session.n_outlier[g] = n_out
            session.eff_depth[g] = depth
        for index, label in ckpt["labeled"]:
            session._pool_mask[index] = False
            session.labeled.append((int(index), int(label)))
        session.history = list(ckpt["history"])
        return session

    def save_checkpoint(self, path, model_ref: str | None = None) -> None:
        Path(path).write_text(json.dumps(self.to_checkpoint(model_ref)))

    @classmethod
    def load_checkpoint(cls, forest: Forest, X_train, path) -> "Session":
        return cls.from_checkpoint(forest, X_train, json.loads(Path(path).read_text()))


def effective_depths_from_checkpoint(forest: Forest, ckpt: dict) -> np.ndarray:
    """Per-leaf effective depths encoded by a checkpoint, without training data.

    Enough to score arbitrary points: untouched leaves keep their
    unsupervised depth, touched leaves take the recorded supervised one.
    """
    if ckpt.get("format") != "actiforest-session":
        raise ValueError("not a session checkpoint document")
    counts = np.bincount(forest.leaf_tree, minlength=forest.n_trees)
    starts = np.zeros(forest.n_trees, dtype=np.int64)
    np.cumsum(counts[:-1], out=starts[1:])
    eff = forest.leaf_base.copy()
    for tree_id, leaf_id, _n_in, _n_out, depth in ckpt["touched_leaves"]:
        eff[int(starts[tree_id] + leaf_id)] = depth
    return eff
