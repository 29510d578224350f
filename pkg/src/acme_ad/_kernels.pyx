# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled forest traversal: per-row depth-first walks over the flattened
tree arrays. This is the hot kernel behind batch scoring."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def mean_path_length(
    int[::1] feature,
    double[::1] threshold,
    int[::1] left,
    int[::1] right,
    double[::1] leaf_value,
    cnp.int64_t[::1] tree_roots,
    double[:, ::1] x,
):
    """Average isolation depth of each row of ``x`` over all trees."""
    cdef Py_ssize_t n_rows = x.shape[0]
    cdef Py_ssize_t n_trees = tree_roots.shape[0]
    out = np.zeros(n_rows, dtype=np.float64)
    cdef double[::1] out_view = out
    cdef Py_ssize_t i, t
    cdef int node
    cdef double acc
    with nogil:
        for i in range(n_rows):
            acc = 0.0
            for t in range(n_trees):
                node = <int> tree_roots[t]
                while feature[node] >= 0:
                    if x[i, feature[node]] < threshold[node]:
                        node = left[node]
                    else:
                        node = right[node]
                acc += leaf_value[node]
            out_view[i] = acc / n_trees
    return out
