"""Gaussian naive Bayes with log-domain posteriors."""

from __future__ import annotations

import numpy as np

from .base import TrainedClassifier, softmax
from ..serialize import decode_array, encode_array


class GaussianNBModel(TrainedClassifier):
    kind = "gnb"

    def __init__(self, classes, n_features, log_priors, means, variances):
        super().__init__(classes, n_features)
        self.log_priors = np.asarray(log_priors)
        self.means = np.asarray(means)
        self.variances = np.asarray(variances)

    def predict_scores(self, X) -> np.ndarray:
        X = self._check(X)
        n, c = X.shape[0], self.n_classes
        log_post = np.empty((n, c))
        for j in range(c):
            var = self.variances[j]
            diff = X - self.means[j]
            log_lik = -0.5 * (np.log(2.0 * np.pi * var) + diff ** 2 / var).sum(axis=1)
            log_post[:, j] = self.log_priors[j] + log_lik
        return softmax(log_post)

    def to_payload(self) -> dict:
        return {
            "kind": self.kind,
            "classes": self.classes.tolist(),
            "n_features": self.n_features,
            "log_priors": encode_array(self.log_priors),
            "means": encode_array(self.means),
            "variances": encode_array(self.variances),
        }

    @staticmethod
    def from_payload(payload: dict) -> "GaussianNBModel":
        return GaussianNBModel(
            np.asarray(payload["classes"]), payload["n_features"],
            decode_array(payload["log_priors"]),
            decode_array(payload["means"]),
            decode_array(payload["variances"]),
        )


def fit_gnb(X: np.ndarray, codes: np.ndarray, classes: np.ndarray,
            var_smoothing: float) -> GaussianNBModel:
    n, d = X.shape
    c = classes.size
    # smoothing floor keeps degenerate columns from collapsing the likelihood
    epsilon = var_smoothing * float(X.var(axis=0).max())
    if epsilon <= 0.0:
        epsilon = var_smoothing
    means = np.empty((c, d))
    variances = np.empty((c, d))
    log_priors = np.empty(c)
    for j, cls in enumerate(classes):
        rows = X[codes == cls]
        means[j] = rows.mean(axis=0)
        variances[j] = rows.var(axis=0) + epsilon
        log_priors[j] = np.log(rows.shape[0] / n)
    return GaussianNBModel(classes, d, log_priors, means, variances)
