"""Exact ranking metrics for anomaly scorings: average precision and ROC AUC.

Anomalies (label 1) are the positive class and higher scores rank first.
Ties are handled group-wise: all equally scored points enter the
precision/recall step (or receive their midrank) together.
"""

from __future__ import annotations

import numpy as np


def _validate(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.ndim != 1 or y.shape != s.shape:
        raise ValueError("scores and labels must be equal-length 1-D arrays")
    if s.shape[0] < 1:
        raise ValueError("need at least one point")
    y = y.astype(np.int64)
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    return s, y


def average_precision(scores, labels) -> float:
    """Area under the precision-recall step curve of the descending ranking.

    Raises:
        ValueError: if no anomalies are present (AP undefined).
    """
    s, y = _validate(scores, labels)
    n_pos = int(y.sum())
    if n_pos == 0:
        raise ValueError("average precision is undefined without anomalies")

    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]
    # Inclusive end position of each tied-score group.
    ends = np.flatnonzero(np.diff(s_sorted) != 0)
    ends = np.append(ends, s.shape[0] - 1)
    tp = np.cumsum(y_sorted)[ends]
    precision = tp / (ends + 1.0)
    delta_tp = np.diff(np.concatenate(([0], tp)))
    return float((delta_tp * precision).sum() / n_pos)


def roc_auc(scores, labels) -> float:
    """Probability a random anomaly outscores a random normal, ties half.

    Computed exactly via midranks (the rank-sum form of the pairwise
    statistic).

    Raises:
        ValueError: unless both classes are present.
    """
    s, y = _validate(scores, labels)
    n_pos = int(y.sum())
    n_neg = s.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC AUC requires at least one point of each class")

    order = np.argsort(s, kind="stable")
    s_sorted = s[order]
    starts = np.flatnonzero(np.r_[True, np.diff(s_sorted) != 0])
    ends = np.r_[starts[1:], s.shape[0]]
    midranks_sorted = np.repeat((starts + ends + 1) / 2.0, ends - starts)
    midranks = np.empty_like(midranks_sorted)
    midranks[order] = midranks_sorted

    rank_sum = midranks[y == 1].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))
