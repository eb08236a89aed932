"""CART decision tree (gini) with deterministic tie-breaking.

Split ties resolve to the lowest feature index, then the lowest threshold;
leaf majorities resolve to the lowest class index. Zero-gain splits are
allowed when the node is impure (min_impurity_decrease defaults to 0),
which is what lets axis splits shatter XOR-style layouts. Trees are stored
as flat parallel arrays so persistence never recurses.
"""

from __future__ import annotations

import numpy as np

from .base import TrainedClassifier, class_index
from ..serialize import decode_array, encode_array

_LEAF = -1


class FlatTree:
    """Parallel-array tree; `value[i]` holds per-class counts at node i."""

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.float64)

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf node index for every row (iterative, mask-based routing)."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] != _LEAF
        while active.any():
            rows = np.flatnonzero(active)
            cur = node[rows]
            go_left = X[rows, self.feature[cur]] <= self.threshold[cur]
            node[rows[go_left]] = self.left[cur[go_left]]
            node[rows[~go_left]] = self.right[cur[~go_left]]
            active = self.feature[node] != _LEAF
        return node

    def leaf_counts(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_payload(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": encode_array(self.threshold),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": encode_array(self.value),
        }

    @staticmethod
    def from_payload(payload: dict) -> "FlatTree":
        return FlatTree(
            payload["feature"], decode_array(payload["threshold"]),
            payload["left"], payload["right"], decode_array(payload["value"]),
        )


def _gini_from_counts(counts: np.ndarray, total) -> np.ndarray:
    with np.errstate(invalid="ignore", divide="ignore"):
        p = counts / np.asarray(total, dtype=float)
    return 1.0 - np.sum(p * p, axis=-1)


def _best_split(X, y_pos, idx, n_classes, features, min_samples_leaf,
                parent_gini):
    """Best (improvement, feature, threshold) over candidate features.

    Improvement is node-local: parent gini minus weighted child gini.
    Returns None when no valid split exists.
    """
    n = idx.size
    best_gain = -np.inf
    best = None
    for f in features:
        vals = X[idx, f]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        boundaries = sv[1:] > sv[:-1]
        if not boundaries.any():
            continue
        sy = y_pos[idx[order]]
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), sy] = 1.0
        cum = np.cumsum(onehot, axis=0)
        left_counts = cum[:-1]
        right_counts = cum[-1] - left_counts
        left_n = np.arange(1, n)
        right_n = n - left_n
        valid = boundaries & (left_n >= min_samples_leaf) & (right_n >= min_samples_leaf)
        if not valid.any():
            continue
        gini_l = _gini_from_counts(left_counts, left_n[:, None])
        gini_r = _gini_from_counts(right_counts, right_n[:, None])
        weighted = (left_n * gini_l + right_n * gini_r) / n
        gain = np.where(valid, parent_gini - weighted, -np.inf)
        pos = int(np.argmax(gain))  # first max = lowest threshold
        if gain[pos] > best_gain + 1e-15:
            best_gain = float(gain[pos])
            best = (best_gain, f, 0.5 * (sv[pos] + sv[pos + 1]))
    return best


def build_cart(X: np.ndarray, y_pos: np.ndarray, n_classes: int,
               max_depth: int | None, min_samples_leaf: int,
               min_impurity_decrease: float,
               rng: np.random.Generator | None = None,
               max_features: int | None = None) -> FlatTree:
    """Grow a CART tree; `max_features` draws a per-node candidate subset."""
    n_total = X.shape[0]
    d = X.shape[1]
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(counts):
        feature.append(_LEAF)
        threshold.append(0.0)
        left.append(_LEAF)
        right.append(_LEAF)
        value.append(counts)
        return len(feature) - 1

    stack = [(np.arange(n_total), 0, new_node(np.bincount(y_pos, minlength=n_classes)))]
    while stack:
        idx, depth, node = stack.pop()
        counts = value[node]
        n = idx.size
        parent_gini = _gini_from_counts(counts, n)
        if parent_gini <= 0.0 or n < 2 * min_samples_leaf or \
                (max_depth is not None and depth >= max_depth):
            continue
        if max_features is not None and max_features < d:
            cand = np.sort(rng.choice(d, size=max_features, replace=False))
        else:
            cand = np.arange(d)
        found = _best_split(X, y_pos, idx, n_classes, cand,
                            min_samples_leaf, parent_gini)
        if found is None:
            continue
        gain, f, thr = found
        if (n / n_total) * gain < min_impurity_decrease - 1e-15:
            continue
        go_left = X[idx, f] <= thr
        li, ri = idx[go_left], idx[~go_left]
        feature[node] = int(f)
        threshold[node] = float(thr)
        left[node] = new_node(np.bincount(y_pos[li], minlength=n_classes))
        right[node] = new_node(np.bincount(y_pos[ri], minlength=n_classes))
        stack.append((ri, depth + 1, right[node]))
        stack.append((li, depth + 1, left[node]))

    return FlatTree(feature, threshold, left, right, np.asarray(value))


class DecisionTreeModel(TrainedClassifier):
    kind = "dt"

    def __init__(self, classes, n_features, tree: FlatTree):
        super().__init__(classes, n_features)
        self.tree = tree

    def predict_scores(self, X) -> np.ndarray:
        X = self._check(X)
        counts = self.tree.leaf_counts(X)
        return counts / counts.sum(axis=1, keepdims=True)

    def to_payload(self) -> dict:
        return {
            "kind": self.kind,
            "classes": self.classes.tolist(),
            "n_features": self.n_features,
            "tree": self.tree.to_payload(),
        }

    @staticmethod
    def from_payload(payload: dict) -> "DecisionTreeModel":
        return DecisionTreeModel(
            np.asarray(payload["classes"]), payload["n_features"],
            FlatTree.from_payload(payload["tree"]),
        )


def fit_dt(X: np.ndarray, codes: np.ndarray, classes: np.ndarray,
           max_depth, min_samples_leaf: int,
           min_impurity_decrease: float) -> DecisionTreeModel:
    y_pos = class_index(classes, codes)
    tree = build_cart(X, y_pos, classes.size, max_depth,
                      min_samples_leaf, min_impurity_decrease)
    return DecisionTreeModel(classes, X.shape[1], tree)
