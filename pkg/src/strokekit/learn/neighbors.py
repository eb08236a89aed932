"""k-nearest neighbors with radius-inclusive ties at the k-th distance."""

from __future__ import annotations

import numpy as np

from .base import TrainedClassifier, class_index
from ..serialize import decode_array, encode_array


class KnnModel(TrainedClassifier):
    kind = "knn"

    def __init__(self, classes, X_train, y_train, k):
        super().__init__(classes, X_train.shape[1])
        self.X_train = np.asarray(X_train)
        self.y_train = np.asarray(y_train)
        self.k = int(k)
        self._train_pos = class_index(self.classes, self.y_train)

    def predict_scores(self, X) -> np.ndarray:
        X = self._check(X)
        # squared euclidean against the whole training set
        d2 = (
            np.sum(X ** 2, axis=1, keepdims=True)
            - 2.0 * X @ self.X_train.T
            + np.sum(self.X_train ** 2, axis=1)
        )
        n_train = self.X_train.shape[0]
        k = min(self.k, n_train)
        scores = np.empty((X.shape[0], self.n_classes))
        for i, row in enumerate(d2):
            kth = np.partition(row, k - 1)[k - 1]
            neighbors = row <= kth  # everything tied with the k-th stays in
            votes = np.bincount(self._train_pos[neighbors],
                                minlength=self.n_classes).astype(float)
            scores[i] = votes / votes.sum()
        return scores

    def to_payload(self) -> dict:
        return {
            "kind": self.kind,
            "classes": self.classes.tolist(),
            "k": self.k,
            "X_train": encode_array(self.X_train),
            "y_train": [int(v) for v in self.y_train],
        }

    @staticmethod
    def from_payload(payload: dict) -> "KnnModel":
        return KnnModel(
            np.asarray(payload["classes"]),
            decode_array(payload["X_train"]),
            np.asarray(payload["y_train"], dtype=np.int64),
            payload["k"],
        )


def fit_knn(X: np.ndarray, codes: np.ndarray, classes: np.ndarray, k: int) -> KnnModel:
    return KnnModel(classes, X.copy(), codes.copy(), k)
