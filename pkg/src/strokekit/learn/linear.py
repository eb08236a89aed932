"""Multinomial logistic regression: full-batch descent with Armijo backtracking."""

from __future__ import annotations

import numpy as np

from .base import TrainedClassifier, class_index, softmax
from ..serialize import decode_array, encode_array

_ARMIJO_C1 = 1e-4
_MAX_BACKTRACKS = 60


class LogisticModel(TrainedClassifier):
    kind = "lr"

    def __init__(self, classes, weights, bias, converged, n_iter):
        super().__init__(classes, weights.shape[1])
        self.weights = np.asarray(weights)  # c x d
        self.bias = np.asarray(bias)        # c
        self.converged = bool(converged)
        self.n_iter = int(n_iter)

    def predict_scores(self, X) -> np.ndarray:
        X = self._check(X)
        return softmax(X @ self.weights.T + self.bias)

    def to_payload(self) -> dict:
        return {
            "kind": self.kind,
            "classes": self.classes.tolist(),
            "weights": encode_array(self.weights),
            "bias": encode_array(self.bias),
            "converged": self.converged,
            "n_iter": self.n_iter,
        }

    @staticmethod
    def from_payload(payload: dict) -> "LogisticModel":
        return LogisticModel(
            np.asarray(payload["classes"]),
            decode_array(payload["weights"]),
            decode_array(payload["bias"]),
            payload["converged"],
            payload["n_iter"],
        )


def fit_lr(X: np.ndarray, codes: np.ndarray, classes: np.ndarray,
           l2: float, max_iter: int, tol: float) -> LogisticModel:
    n, d = X.shape
    c = classes.size
    y_pos = class_index(classes, codes)
    onehot = np.zeros((n, c))
    onehot[np.arange(n), y_pos] = 1.0

    W = np.zeros((c, d))
    b = np.zeros(c)

    def loss_and_grad(W, b):
        logits = X @ W.T + b
        shifted = logits - logits.max(axis=1, keepdims=True)
        log_z = np.log(np.exp(shifted).sum(axis=1))
        log_p = shifted - log_z[:, None]
        loss = -log_p[np.arange(n), y_pos].mean() + 0.5 * l2 * np.sum(W * W)
        P = np.exp(log_p)
        R = (P - onehot) / n
        return loss, R.T @ X + l2 * W, R.sum(axis=0)

    loss, gW, gb = loss_and_grad(W, b)
    step = 1.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        grad_sq = float(np.sum(gW * gW) + np.sum(gb * gb))
        if np.sqrt(grad_sq) <= tol:
            converged = True
            break
        # Armijo backtracking from twice the last accepted step
        step = min(step * 2.0, 1e4)
        for _ in range(_MAX_BACKTRACKS):
            W_new = W - step * gW
            b_new = b - step * gb
            loss_new, gW_new, gb_new = loss_and_grad(W_new, b_new)
            if loss_new <= loss - _ARMIJO_C1 * step * grad_sq:
                break
            step *= 0.5
        W, b, loss, gW, gb = W_new, b_new, loss_new, gW_new, gb_new
    else:
        grad_sq = float(np.sum(gW * gW) + np.sum(gb * gb))
        converged = np.sqrt(grad_sq) <= tol

    return LogisticModel(classes, W, b, converged, it)
