"""Isolation forest core: training, routing, path lengths, anomaly scores.

Trees are stored flattened (one struct-of-arrays per forest, concatenated
across trees) so the routing kernel can descend them without object
overhead. Every leaf owns a global slot in ``leaf_base``; supervised
overlays (see :mod:`actiforest.active`) replace those per-leaf depths
without touching the tree structure.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import _kernels

EULER_GAMMA = 0.5772156649

DEFAULT_N_TREES = 100
DEFAULT_PSI = 256


def c_factor(psi: int) -> float:
    """Expected path length of an unsuccessful BST search over ``psi`` points.

    Uses the harmonic-number approximation H(i) = ln(i) + gamma for all i,
    so c_factor(2) = 2*gamma - 1.

    Raises:
        ValueError: if psi < 2.
    """
    if psi < 2:
        raise ValueError(f"c_factor requires psi >= 2, got {psi}")
    return 2.0 * (math.log(psi - 1) + EULER_GAMMA) - 2.0 * (psi - 1) / psi


def score_from_depth(mean_depth, c_psi: float):
    """Map mean path length E to the anomaly score 2**(-E / c(psi)).

    Accepts scalars or arrays. E = c(psi) gives 0.5; shorter paths push the
    score toward 1, longer paths toward 0.
    """
    return 2.0 ** (-np.asarray(mean_depth, dtype=np.float64) / c_psi)


def _leaf_adjustment(size: int) -> float:
    # Multi-point leaves stand in for an unbuilt subtree; add the expected
    # remaining search depth. Single-point leaves need no correction.
    return c_factor(size) if size > 1 else 0.0


class Forest:
    """A fitted isolation forest.

    Attributes:
        psi: subsample size each tree was grown on.
        n_trees: number of trees.
        c_psi: score normalization constant c(psi).
        n_features: feature count the forest was fitted with.
        h_min, h_max: per-tree minimum / maximum leaf path length (leaf depth
            plus the multi-point adjustment), the bounds supervised depths
            saturate to.
        leaf_base: unsupervised path length per global leaf slot.
    """

    def __init__(
        self,
        *,
        psi: int,
        n_features: int,
        feature: np.ndarray,
        threshold: np.ndarray,
        left: np.ndarray,
        right: np.ndarray,
        depth: np.ndarray,
        size: np.ndarray,
        leaf_index: np.ndarray,
        roots: np.ndarray,
        tree_of_node: np.ndarray,
        seed=None,
    ):
        self.psi = int(psi)
        self.n_features = int(n_features)
        self.c_psi = c_factor(self.psi)
        self.seed = seed

        self.feature = np.ascontiguousarray(feature, dtype=np.int32)
        self.threshold = np.ascontiguousarray(threshold, dtype=np.float64)
        self.left = np.ascontiguousarray(left, dtype=np.int32)
        self.right = np.ascontiguousarray(right, dtype=np.int32)
        self.depth = np.ascontiguousarray(depth, dtype=np.int32)
        self.size = np.ascontiguousarray(size, dtype=np.int32)
        self.leaf_index = np.ascontiguousarray(leaf_index, dtype=np.int32)
        self.roots = np.ascontiguousarray(roots, dtype=np.int32)
        self.tree_of_node = np.ascontiguousarray(tree_of_node, dtype=np.int32)
        self.n_trees = int(self.roots.shape[0])

        leaf_nodes = np.flatnonzero(self.leaf_index >= 0)
        order = np.argsort(self.leaf_index[leaf_nodes])
        leaf_nodes = leaf_nodes[order]
        self.leaf_node = leaf_nodes.astype(np.int32)
        self.leaf_tree = self.tree_of_node[leaf_nodes]
        self.leaf_depth = self.depth[leaf_nodes]
        self.leaf_size = self.size[leaf_nodes]
        self.leaf_base = self.leaf_depth.astype(np.float64) + np.array(
            [_leaf_adjustment(int(s)) for s in self.leaf_size]
        )
        self.n_leaves = int(self.leaf_base.shape[0])

        self.h_min = np.empty(self.n_trees, dtype=np.float64)
        self.h_max = np.empty(self.n_trees, dtype=np.float64)
        for t in range(self.n_trees):
            vals = self.leaf_base[self.leaf_tree == t]
            self.h_min[t] = vals.min()
            self.h_max[t] = vals.max()

    # -- routing ---------------------------------------------------------

    def _check_features(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(
                f"expected a 2-D array with {self.n_features} features, "
                f"got shape {X.shape}"
            )
        return X

    def route(self, X: np.ndarray) -> np.ndarray:
        """Global leaf slot of every row of X in every tree, (n, n_trees)."""
        X = self._check_features(X)
        return _kernels.route_forest(
            self.feature,
            self.threshold,
            self.left,
            self.right,
            self.leaf_index,
            self.roots,
            X,
        )

    def leaf_for(self, tree_index: int, x) -> int:
        """Global leaf slot x falls into within one tree (pure-python walk)."""
        if not 0 <= tree_index < self.n_trees:
            raise IndexError(f"tree_index {tree_index} out of range")
        x = np.asarray(x, dtype=np.float64)
        node = int(self.roots[tree_index])
        while self.feature[node] >= 0:
            if x[self.feature[node]] < self.threshold[node]:
                node = int(self.left[node])
            else:
                node = int(self.right[node])
        return int(self.leaf_index[node])

    # -- scoring ---------------------------------------------------------

    def path_length_unsup(self, tree_index: int, x) -> float:
        """Unsupervised path length of x in one tree (leaf depth + adjustment)."""
        return float(self.leaf_base[self.leaf_for(tree_index, x)])

    def path_lengths(self, X: np.ndarray) -> np.ndarray:
        """Unsupervised path lengths, shape (n, n_trees)."""
        return self.leaf_base[self.route(X)]

    def anomaly_scores(self, X: np.ndarray) -> np.ndarray:
        return score_from_depth(self.path_lengths(X).mean(axis=1), self.c_psi)

    def anomaly_score(self, x) -> float:
        return float(self.anomaly_scores(np.asarray(x, dtype=np.float64)[None, :])[0])

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        """JSON-ready structure; numeric fields round-trip bit-exactly."""
        trees = []
        starts = self._node_starts()
        for t in range(self.n_trees):
            lo, hi = starts[t], starts[t + 1]
            leaf_start = int(self.leaf_index[lo:hi][self.leaf_index[lo:hi] >= 0].min())
            nodes = []
            for n in range(lo, hi):
                if self.feature[n] >= 0:
                    nodes.append(
                        [
                            "split",
                            int(self.feature[n]),
                            float(self.threshold[n]),
                            int(self.left[n] - lo),
                            int(self.right[n] - lo),
                            int(self.depth[n]),
                            int(self.size[n]),
                            -1,
                        ]
                    )
                else:
                    nodes.append(
                        [
                            "leaf",
                            -1,
                            None,
                            -1,
                            -1,
                            int(self.depth[n]),
                            int(self.size[n]),
                            int(self.leaf_index[n] - leaf_start),
                        ]
                    )
            trees.append({"nodes": nodes})
        return {
            "format": "actiforest-model",
            "version": 1,
            "psi": self.psi,
            "n_trees": self.n_trees,
            "c_psi": self.c_psi,
            "n_features": self.n_features,
            "trees": trees,
        }

    def _node_starts(self) -> np.ndarray:
        counts = np.bincount(self.tree_of_node, minlength=self.n_trees)
        starts = np.zeros(self.n_trees + 1, dtype=np.int64)
        np.cumsum(counts, out=starts[1:])
        return starts

    @classmethod
    def from_dict(cls, d: dict) -> "Forest":
        if d.get("format") != "actiforest-model":
            raise ValueError("not a model document")
        feature, threshold, left, right = [], [], [], []
        depth, size, leaf_index, tree_of_node, roots = [], [], [], [], []
        leaf_slot = 0
        for t, tree in enumerate(d["trees"]):
            offset = len(feature)
            roots.append(offset)
            local_leaves = 0
            for kind, f, v, l, r, dep, sz, lid in tree["nodes"]:
                tree_of_node.append(t)
                depth.append(dep)
                size.append(sz)
                if kind == "split":
                    feature.append(f)
                    threshold.append(v)
                    left.append(offset + l)
                    right.append(offset + r)
                    leaf_index.append(-1)
                else:
                    feature.append(-1)
                    threshold.append(0.0)
                    left.append(-1)
                    right.append(-1)
                    leaf_index.append(leaf_slot + lid)
                    local_leaves += 1
            leaf_slot += local_leaves
        forest = cls(
            psi=d["psi"],
            n_features=d["n_features"],
            feature=np.array(feature, dtype=np.int32),
            threshold=np.array(threshold, dtype=np.float64),
            left=np.array(left, dtype=np.int32),
            right=np.array(right, dtype=np.int32),
            depth=np.array(depth, dtype=np.int32),
            size=np.array(size, dtype=np.int32),
            leaf_index=np.array(leaf_index, dtype=np.int32),
            roots=np.array(roots, dtype=np.int32),
            tree_of_node=np.array(tree_of_node, dtype=np.int32),
        )
        stored_c = d.get("c_psi")
        if stored_c is not None and stored_c != forest.c_psi:
            raise ValueError("model file c_psi does not match psi")
        return forest

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "Forest":
        return cls.from_dict(json.loads(Path(path).read_text()))


def height_limit(psi: int) -> int:
    """Growth stops at ceil(log2(psi)) edges, the average-isolation depth."""
    return max(1, math.ceil(math.log2(psi)))


class _TreeBuilder:
    def __init__(self, Xs: np.ndarray, limit: int, rng: np.random.Generator):
        self.Xs = Xs
        self.limit = limit
        self.rng = rng
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.depth: list[int] = []
        self.size: list[int] = []
        self.is_leaf: list[bool] = []

    def build(self, rows: np.ndarray, depth: int) -> int:
        nid = len(self.feature)
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.depth.append(depth)
        self.size.append(int(rows.shape[0]))
        self.is_leaf.append(True)

        if rows.shape[0] > 1 and depth < self.limit:
            pts = self.Xs[rows]
            mins = pts.min(axis=0)
            maxs = pts.max(axis=0)
            candidates = np.flatnonzero(mins < maxs)
            if candidates.size:
                f = int(candidates[self.rng.integers(candidates.size)])
                mn, mx = float(mins[f]), float(maxs[f])
                # Split value in (mn, mx] so both children are nonempty; the
                # loop only retriggers if rounding collapses p onto mn.
                p = mx - self.rng.random() * (mx - mn)
                while p <= mn:
                    p = mx - self.rng.random() * (mx - mn)
                go_left = pts[:, f] < p
                self.feature[nid] = f
                self.threshold[nid] = p
                self.is_leaf[nid] = False
                self.left[nid] = self.build(rows[go_left], depth + 1)
                self.right[nid] = self.build(rows[~go_left], depth + 1)
        return nid


def fit(X, n_trees: int = DEFAULT_N_TREES, psi: int | None = None, seed=None) -> Forest:
    """Grow an isolation forest on independent uniform subsamples.

    Each tree takes a without-replacement subsample of size ``psi``
    (default min(256, n)) and splits on a uniformly random non-constant
    feature at a uniformly random value in (min, max] until points are
    isolated, identical, or the height limit ceil(log2(psi)) is hit.

    Raises:
        ValueError: on an empty/1-point dataset, psi < 2 or psi > n.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {X.shape}")
    n_x, m = X.shape
    if m < 1:
        raise ValueError("dataset needs at least one feature")
    if n_trees < 1:
        raise ValueError(f"n_trees must be >= 1, got {n_trees}")
    if psi is None:
        psi = min(DEFAULT_PSI, n_x)
    if psi < 2:
        raise ValueError(f"psi must be >= 2, got {psi}")
    if psi > n_x:
        raise ValueError(f"psi ({psi}) cannot exceed the dataset size ({n_x})")

    limit = height_limit(psi)
    streams = np.random.SeedSequence(seed).spawn(n_trees)

    feature, threshold, left, right = [], [], [], []
    depth, size, leaf_index, tree_of_node, roots = [], [], [], [], []
    leaf_slot = 0
    for t in range(n_trees):
        rng = np.random.default_rng(streams[t])
        rows = rng.choice(n_x, size=psi, replace=False)
        builder = _TreeBuilder(X, limit, rng)
        builder.build(rows, 0)

        offset = len(feature)
        roots.append(offset)
        n_nodes = len(builder.feature)
        feature.extend(builder.feature)
        threshold.extend(builder.threshold)
        left.extend(l if l < 0 else l + offset for l in builder.left)
        right.extend(r if r < 0 else r + offset for r in builder.right)
        depth.extend(builder.depth)
        size.extend(builder.size)
        tree_of_node.extend([t] * n_nodes)
        for leaf in builder.is_leaf:
            if leaf:
                leaf_index.append(leaf_slot)
                leaf_slot += 1
            else:
                leaf_index.append(-1)

    return Forest(
        psi=psi,
        n_features=m,
        feature=np.array(feature, dtype=np.int32),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int32),
        right=np.array(right, dtype=np.int32),
        depth=np.array(depth, dtype=np.int32),
        size=np.array(size, dtype=np.int32),
        leaf_index=np.array(leaf_index, dtype=np.int32),
        roots=np.array(roots, dtype=np.int32),
        tree_of_node=np.array(tree_of_node, dtype=np.int32),
        seed=seed,
    )
