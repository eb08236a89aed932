"""Shared classifier surface: predict is argmax of predict_scores everywhere.

Ties in the score vector break toward the lowest class index, so the
argmax(scores) == predict contract holds for every kind by construction.
"""

from __future__ import annotations

import numpy as np

from ..data import LabelVector, as_array
from ..errors import DimensionMismatch, NonFiniteFeature, ValidationError


class TrainedClassifier:
    """Base for all fitted models: immutable state, pure predict."""

    kind: str = "?"

    def __init__(self, classes: np.ndarray, n_features: int):
        self.classes = np.array(classes, dtype=np.int64, copy=True)
        self.classes.flags.writeable = False
        self.n_features = int(n_features)

    @property
    def n_classes(self) -> int:
        return self.classes.size

    def _check(self, X) -> np.ndarray:
        X = as_array(X)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(self.n_features, X.shape[1])
        return X

    def predict_scores(self, X) -> np.ndarray:
        """Per-class score rows; finite, normalized to sum 1."""
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        scores = self.predict_scores(X)
        return self.classes[np.argmax(scores, axis=1)]

    def to_payload(self) -> dict:
        raise NotImplementedError


class ConstantModel(TrainedClassifier):
    """Degenerate single-class training set: always that class, score 1."""

    kind = "constant"

    def __init__(self, classes: np.ndarray, n_features: int):
        super().__init__(classes, n_features)

    def predict_scores(self, X) -> np.ndarray:
        X = self._check(X)
        return np.ones((X.shape[0], 1))

    def to_payload(self) -> dict:
        return {"kind": self.kind, "classes": self.classes.tolist(),
                "n_features": self.n_features}

    @staticmethod
    def from_payload(payload: dict) -> "ConstantModel":
        return ConstantModel(np.asarray(payload["classes"]), payload["n_features"])


def check_training_data(X, y) -> tuple[np.ndarray, np.ndarray]:
    """Validate and coerce (X, label codes) for fitting."""
    X = as_array(X)
    codes = y.codes if isinstance(y, LabelVector) else np.asarray(y, dtype=np.int64)
    if X.ndim != 2:
        raise ValidationError("training X must be 2-D")
    if X.shape[0] != codes.size:
        raise DimensionMismatch(X.shape[0], codes.size, "labels")
    if X.shape[0] < 2:
        raise ValidationError("need at least 2 training rows")
    if not np.all(np.isfinite(X)):
        raise NonFiniteFeature("training features")
    return X, codes


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def class_index(classes: np.ndarray, codes: np.ndarray) -> np.ndarray:
    """Map label codes to 0..c-1 positions within `classes` (sorted)."""
    return np.searchsorted(classes, codes)
