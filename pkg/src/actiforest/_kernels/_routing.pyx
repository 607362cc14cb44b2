# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tree routing: one tight descent loop per (point, tree) pair."""

import numpy as np

cimport numpy as cnp


def route_forest(
    int[::1] feature,
    double[::1] threshold,
    int[::1] left,
    int[::1] right,
    int[::1] leaf_index,
    int[::1] roots,
    double[:, ::1] X,
):
    """Route every row of X through every tree of a flattened forest.

    Same contract as the numpy fallback: returns int32 (n_points, n_trees)
    global leaf indices.
    """
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t n_trees = roots.shape[0]
    out = np.empty((n, n_trees), dtype=np.int32)
    cdef int[:, ::1] o = out
    cdef Py_ssize_t i, t
    cdef int node, f
    with nogil:
        for i in range(n):
            for t in range(n_trees):
                node = roots[t]
                f = feature[node]
                while f >= 0:
                    if X[i, f] < threshold[node]:
                        node = left[node]
                    else:
                        node = right[node]
                    f = feature[node]
                o[i, t] = leaf_index[node]
    return out
