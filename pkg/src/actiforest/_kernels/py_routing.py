"""Pure-numpy tree routing, the fallback when the compiled kernel is absent.

Routes points level by level: at each pass every still-internal lane takes
one split, so the loop runs height-limit times rather than once per point.
"""

from __future__ import annotations

import numpy as np


def route_forest(
    feature: np.ndarray,
    threshold: np.ndarray,
    left: np.ndarray,
    right: np.ndarray,
    leaf_index: np.ndarray,
    roots: np.ndarray,
    X: np.ndarray,
) -> np.ndarray:
    """Route every row of X through every tree of a flattened forest.

    Node arrays are the concatenated per-tree arrays; ``roots`` holds the
    absolute root index of each tree. ``feature < 0`` marks a leaf, whose
    global leaf slot is ``leaf_index[node]``.

    Returns an int32 matrix of shape (n_points, n_trees) of global leaf
    indices.
    """
    n = X.shape[0]
    n_trees = roots.shape[0]
    out = np.empty((n, n_trees), dtype=np.int32)
    rows = np.arange(n)
    for t in range(n_trees):
        node = np.full(n, roots[t], dtype=np.int64)
        active = np.flatnonzero(feature[node] >= 0)
        while active.size:
            nd = node[active]
            f = feature[nd]
            go_left = X[rows[active], f] < threshold[nd]
            node[active] = np.where(go_left, left[nd], right[nd])
            active = active[feature[node[active]] >= 0]
        out[:, t] = leaf_index[node]
    return out
