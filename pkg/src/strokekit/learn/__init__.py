"""Seven classical classifiers behind one fit/predict/score surface."""

from __future__ import annotations

import numpy as np

from .base import ConstantModel, TrainedClassifier, check_training_data
from .boosting import XgbModel, fit_xgb
from .forest import RandomForestModel, fit_rf
from .linear import LogisticModel, fit_lr
from .naive_bayes import GaussianNBModel, fit_gnb
from .neighbors import KnnModel, fit_knn
from .spec import KINDS, LearnerSpec
from .svc import SvcModel, fit_svc
from .tree import DecisionTreeModel, fit_dt

__all__ = [
    "KINDS",
    "LearnerSpec",
    "TrainedClassifier",
    "ConstantModel",
    "GaussianNBModel",
    "KnnModel",
    "LogisticModel",
    "DecisionTreeModel",
    "RandomForestModel",
    "XgbModel",
    "SvcModel",
    "fit",
    "predict",
    "predict_scores",
    "model_from_payload",
]


def fit(spec: LearnerSpec, X_train, y) -> TrainedClassifier:
    """Train one classifier of `spec.kind` on (X_train, y)."""
    X, codes = check_training_data(X_train, y)
    classes = np.unique(codes)
    if classes.size == 1:
        return ConstantModel(classes, X.shape[1])
    hp = spec.hyperparams
    if spec.kind == "gnb":
        return fit_gnb(X, codes, classes, hp["var_smoothing"])
    if spec.kind == "knn":
        return fit_knn(X, codes, classes, hp["k"])
    if spec.kind == "lr":
        return fit_lr(X, codes, classes, hp["l2"], hp["max_iter"], hp["tol"])
    if spec.kind == "dt":
        return fit_dt(X, codes, classes, hp["max_depth"],
                      hp["min_samples_leaf"], hp["min_impurity_decrease"])
    if spec.kind == "rf":
        return fit_rf(X, codes, classes, hp["n_trees"], hp["max_features"],
                      hp["bootstrap"], hp["max_depth"], spec.seed)
    if spec.kind == "xgb":
        return fit_xgb(X, codes, classes, hp["n_rounds"], hp["learning_rate"],
                       hp["max_depth"], hp["lambda"], hp["gamma"])
    if spec.kind == "svc":
        return fit_svc(X, codes, classes, hp["kernel"], hp["gamma"],
                       hp["C"], hp["tol"], hp["max_passes"], spec.seed)
    raise AssertionError(f"unhandled kind {spec.kind}")


def predict(model: TrainedClassifier, X) -> np.ndarray:
    return model.predict(X)


def predict_scores(model: TrainedClassifier, X) -> np.ndarray:
    return model.predict_scores(X)


_MODEL_TYPES = {
    "constant": ConstantModel,
    "gnb": GaussianNBModel,
    "knn": KnnModel,
    "lr": LogisticModel,
    "dt": DecisionTreeModel,
    "rf": RandomForestModel,
    "xgb": XgbModel,
    "svc": SvcModel,
}


def model_from_payload(payload: dict) -> TrainedClassifier:
    kind = payload.get("kind")
    if kind not in _MODEL_TYPES:
        from ..errors import CorruptPayload
        raise CorruptPayload(f"unknown classifier kind {kind!r}")
    return _MODEL_TYPES[kind].from_payload(payload)
