"""Pure-NumPy forest traversal, the fallback when the compiled kernel is
unavailable. Walks all rows through each tree level-synchronously, so the
cost is (trees x tree height) vectorized passes over the batch.
"""

from __future__ import annotations

import numpy as np


def mean_path_length(
    feature: np.ndarray,
    threshold: np.ndarray,
    left: np.ndarray,
    right: np.ndarray,
    leaf_value: np.ndarray,
    tree_roots: np.ndarray,
    x: np.ndarray,
) -> np.ndarray:
    """Average isolation depth of each row of ``x`` over all trees.

    Node arrays are the flattened forest: ``feature[i] < 0`` marks a leaf
    whose ``leaf_value`` is the path-length contribution (depth plus the
    subtree-size adjustment).
    """
    n = x.shape[0]
    total = np.zeros(n, dtype=np.float64)
    row_ids = np.arange(n)
    for root in tree_roots:
        node = np.full(n, root, dtype=np.int64)
        active = feature[node] >= 0
        while active.any():
            idx = row_ids[active]
            nd = node[active]
            split_feature = feature[nd]
            go_left = x[idx, split_feature] < threshold[nd]
            node[active] = np.where(go_left, left[nd], right[nd])
            active = feature[node] >= 0
        total += leaf_value[node]
    return total / len(tree_roots)
