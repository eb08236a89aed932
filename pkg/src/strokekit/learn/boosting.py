"""Gradient boosting with softmax cross-entropy and second-order split gain.

One regression tree per class per round, grown by exact greedy search over
all thresholds. Gain follows the usual second-order formula

    0.5 * (GL^2/(HL+lambda) + GR^2/(HR+lambda) - G^2/(H+lambda)) - gamma

and leaves output -G/(H+lambda), shrunk by the learning rate. Split ties
break to the lowest feature index, then the lowest threshold. The training
loss after every round is recorded so monotonicity is checkable.
"""

from __future__ import annotations

import numpy as np

from .base import TrainedClassifier, class_index, softmax
from ..serialize import decode_array, encode_array

_LEAF = -1


class RegressionTree:
    """Flat-array regression tree; `value[i]` is the leaf output."""

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.float64)

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] != _LEAF
        while active.any():
            rows = np.flatnonzero(active)
            cur = node[rows]
            go_left = X[rows, self.feature[cur]] <= self.threshold[cur]
            node[rows[go_left]] = self.left[cur[go_left]]
            node[rows[~go_left]] = self.right[cur[~go_left]]
            active = self.feature[node] != _LEAF
        return self.value[node]

    def to_payload(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": encode_array(self.threshold),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": encode_array(self.value),
        }

    @staticmethod
    def from_payload(payload: dict) -> "RegressionTree":
        return RegressionTree(
            payload["feature"], decode_array(payload["threshold"]),
            payload["left"], payload["right"], decode_array(payload["value"]),
        )


def _leaf_weight(g_sum: float, h_sum: float, reg_lambda: float) -> float:
    denom = h_sum + reg_lambda
    return -g_sum / denom if denom > 0.0 else 0.0


def _score(g_sum, h_sum, reg_lambda):
    # denominator hits 0 only at reg_lambda=0 on saturated nodes (all h=0)
    denom = np.asarray(h_sum + reg_lambda, dtype=float)
    g_sq = np.asarray(g_sum, dtype=float) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(denom > 0.0, g_sq / np.where(denom > 0.0, denom, 1.0), 0.0)
    return out if out.ndim else float(out)


def build_gradient_tree(X: np.ndarray, g: np.ndarray, h: np.ndarray,
                        max_depth: int, reg_lambda: float,
                        reg_gamma: float) -> RegressionTree:
    n, d = X.shape
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(g_sum, h_sum):
        feature.append(_LEAF)
        threshold.append(0.0)
        left.append(_LEAF)
        right.append(_LEAF)
        value.append(_leaf_weight(g_sum, h_sum, reg_lambda))
        return len(feature) - 1

    stack = [(np.arange(n), 0, new_node(g.sum(), h.sum()))]
    while stack:
        idx, depth, node = stack.pop()
        if depth >= max_depth or idx.size < 2:
            continue
        g_total = g[idx].sum()
        h_total = h[idx].sum()
        parent_score = _score(g_total, h_total, reg_lambda)
        best_gain = 0.0
        best = None
        for f in range(d):
            vals = X[idx, f]
            order = np.argsort(vals, kind="stable")
            sv = vals[order]
            boundaries = sv[1:] > sv[:-1]
            if not boundaries.any():
                continue
            gl = np.cumsum(g[idx[order]])[:-1]
            hl = np.cumsum(h[idx[order]])[:-1]
            gain = np.where(
                boundaries,
                0.5 * (_score(gl, hl, reg_lambda)
                       + _score(g_total - gl, h_total - hl, reg_lambda)
                       - parent_score) - reg_gamma,
                -np.inf,
            )
            pos = int(np.argmax(gain))
            if gain[pos] > best_gain + 1e-15:
                best_gain = float(gain[pos])
                best = (f, 0.5 * (sv[pos] + sv[pos + 1]))
        if best is None:
            continue
        f, thr = best
        go_left = X[idx, f] <= thr
        li, ri = idx[go_left], idx[~go_left]
        feature[node] = int(f)
        threshold[node] = float(thr)
        left[node] = new_node(g[li].sum(), h[li].sum())
        right[node] = new_node(g[ri].sum(), h[ri].sum())
        stack.append((ri, depth + 1, right[node]))
        stack.append((li, depth + 1, left[node]))

    return RegressionTree(feature, threshold, left, right, value)


class XgbModel(TrainedClassifier):
    kind = "xgb"

    def __init__(self, classes, n_features, rounds, learning_rate, train_loss):
        super().__init__(classes, n_features)
        self.rounds = rounds  # list of per-class RegressionTree lists
        self.learning_rate = float(learning_rate)
        self.train_loss = list(train_loss)  # loss after each round, index 0 = before boosting

    def _raw(self, X: np.ndarray) -> np.ndarray:
        F = np.zeros((X.shape[0], self.n_classes))
        for trees in self.rounds:
            for k, tree in enumerate(trees):
                F[:, k] += self.learning_rate * tree.predict(X)
        return F

    def predict_scores(self, X) -> np.ndarray:
        X = self._check(X)
        return softmax(self._raw(X))

    def to_payload(self) -> dict:
        return {
            "kind": self.kind,
            "classes": self.classes.tolist(),
            "n_features": self.n_features,
            "learning_rate": self.learning_rate,
            "train_loss": [float(v) for v in self.train_loss],
            "rounds": [[t.to_payload() for t in trees] for trees in self.rounds],
        }

    @staticmethod
    def from_payload(payload: dict) -> "XgbModel":
        return XgbModel(
            np.asarray(payload["classes"]), payload["n_features"],
            [[RegressionTree.from_payload(t) for t in trees]
             for trees in payload["rounds"]],
            payload["learning_rate"], payload["train_loss"],
        )


def fit_xgb(X: np.ndarray, codes: np.ndarray, classes: np.ndarray,
            n_rounds: int, learning_rate: float, max_depth: int,
            reg_lambda: float, reg_gamma: float) -> XgbModel:
    n = X.shape[0]
    c = classes.size
    y_pos = class_index(classes, codes)
    onehot = np.zeros((n, c))
    onehot[np.arange(n), y_pos] = 1.0

    F = np.zeros((n, c))

    def ce_loss():
        P = softmax(F)
        return float(-np.log(np.maximum(P[np.arange(n), y_pos], 1e-300)).mean())

    losses = [ce_loss()]
    rounds = []
    for _ in range(n_rounds):
        P = softmax(F)
        trees = []
        for k in range(c):
            g = P[:, k] - onehot[:, k]
            h = P[:, k] * (1.0 - P[:, k])
            tree = build_gradient_tree(X, g, h, max_depth, reg_lambda, reg_gamma)
            trees.append(tree)
            F[:, k] += learning_rate * tree.predict(X)
        rounds.append(trees)
        losses.append(ce_loss())

    return XgbModel(classes, X.shape[1], rounds, learning_rate, losses)
