"""Independent brute-force reference implementations used as test oracles.

Deliberately naive and separate from the package code paths: exact rational
arithmetic where it matters, O(n^2) scans elsewhere.
"""

from fractions import Fraction

import numpy as np

from actiforest.iforest import c_factor


def brute_average_precision(scores, labels) -> float:
    """AP via explicit O(n^2) precision/recall recomputation at every distinct
    score threshold, in exact rational arithmetic."""
    scores = [float(s) for s in scores]
    labels = [int(l) for l in labels]
    n_pos = sum(labels)
    assert n_pos > 0
    thresholds = sorted(set(scores), reverse=True)
    ap = Fraction(0)
    prev_recall = Fraction(0)
    for th in thresholds:
        tp = sum(1 for s, l in zip(scores, labels) if s >= th and l == 1)
        taken = sum(1 for s in scores if s >= th)
        precision = Fraction(tp, taken)
        recall = Fraction(tp, n_pos)
        ap += (recall - prev_recall) * precision
        prev_recall = recall
    return float(ap)


def brute_roc_auc(scores, labels) -> float:
    """AUC as the plain pairwise win/tie count over anomaly-normal pairs."""
    pos = [float(s) for s, l in zip(scores, labels) if int(l) == 1]
    neg = [float(s) for s, l in zip(scores, labels) if int(l) == 0]
    assert pos and neg
    wins = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1.0
            elif p == q:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def brute_select_most_anomalous(H) -> int:
    """Row of minimum mean, scanned with plain python sums; lowest index wins."""
    best, best_mean = 0, None
    for j, row in enumerate(H):
        m = sum(float(v) for v in row) / len(row)
        if best_mean is None or m < best_mean:
            best, best_mean = j, m
    return best


def brute_select_max_uncertainty(H) -> int:
    """Row of maximum population standard deviation via a two-pass python
    loop; lowest index wins."""
    best, best_std = 0, None
    for j, row in enumerate(H):
        vals = [float(v) for v in row]
        m = sum(vals) / len(vals)
        var = sum((v - m) ** 2 for v in vals) / len(vals)
        std = var**0.5
        if best_std is None or std > best_std:
            best, best_std = j, std
    return best


def brute_path_length(forest, tree_index: int, x) -> float:
    """Walk the stored tree structure edge by edge and re-derive the path
    length from the reached leaf's depth and size."""
    node = int(forest.roots[tree_index])
    edges = 0
    while forest.feature[node] >= 0:
        f = int(forest.feature[node])
        if float(x[f]) < float(forest.threshold[node]):
            node = int(forest.left[node])
        else:
            node = int(forest.right[node])
        edges += 1
    size = int(forest.size[node])
    assert edges == int(forest.depth[node])
    return edges + (c_factor(size) if size > 1 else 0.0)


def grid_points(low: float, high: float, per_axis: int) -> np.ndarray:
    """Dense 2-D probe grid covering [low, high]^2."""
    axis = np.linspace(low, high, per_axis)
    xx, yy = np.meshgrid(axis, axis)
    return np.column_stack([xx.ravel(), yy.ravel()])
