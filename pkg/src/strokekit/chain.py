"""Fit and apply the scaler -> optimizer -> classifier chain of one config.

Every stage fits on training rows only; `fit_chain` never sees evaluation
rows, which is what the leakage canaries verify.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import PipelineConfig
from .data import LabelVector, Scaler, as_array, standardize_apply, standardize_fit
from .errors import CorruptPayload
from .learn import TrainedClassifier, fit, model_from_payload
from .reduce import (
    BfoConfig,
    FeatureMask,
    LdaModel,
    PcaModel,
    bfo_select,
    components_for_variance,
    lda_fit,
    lda_transform,
    pca_fit,
    pca_transform,
    wrapper_fitness,
)
from .serialize import payload_checksum


def apply_transform(transform, X: np.ndarray) -> np.ndarray:
    if transform is None:
        return X
    if isinstance(transform, PcaModel):
        return pca_transform(transform, X)
    if isinstance(transform, LdaModel):
        return lda_transform(transform, X)
    if isinstance(transform, FeatureMask):
        return X[:, transform.selected]
    raise TypeError(f"unknown transform {type(transform).__name__}")


def transform_payload(transform) -> dict | None:
    return None if transform is None else transform.to_payload()


def transform_from_payload(payload: dict | None):
    if payload is None:
        return None
    kind = payload.get("kind")
    if kind == "pca":
        return PcaModel.from_payload(payload)
    if kind == "lda":
        return LdaModel.from_payload(payload)
    if kind == "mask":
        return FeatureMask.from_payload(payload)
    raise CorruptPayload(f"unknown transform kind {kind!r}")


@dataclass
class Chain:
    scaler: Scaler | None
    transform: object | None
    classifier: TrainedClassifier
    class_names: tuple[str, ...]

    def _prepare(self, X) -> np.ndarray:
        X = as_array(X)
        if self.scaler is not None:
            X = standardize_apply(self.scaler, X)
        return apply_transform(self.transform, X)

    def predict(self, X) -> np.ndarray:
        return self.classifier.predict(self._prepare(X))

    def predict_scores(self, X) -> np.ndarray:
        return self.classifier.predict_scores(self._prepare(X))

    def to_payload(self) -> dict:
        return {
            "scaler": None if self.scaler is None else self.scaler.to_payload(),
            "transform": transform_payload(self.transform),
            "classifier": self.classifier.to_payload(),
            "class_names": list(self.class_names),
        }

    def fingerprint(self) -> str:
        """Checksum of all fitted state; leakage canaries compare these."""
        return payload_checksum(self.to_payload())

    @staticmethod
    def from_payload(payload: dict) -> "Chain":
        scaler = payload.get("scaler")
        return Chain(
            scaler=None if scaler is None else Scaler.from_payload(scaler),
            transform=transform_from_payload(payload.get("transform")),
            classifier=model_from_payload(payload["classifier"]),
            class_names=tuple(payload.get("class_names", ())),
        )


def fit_transform_stage(config: PipelineConfig, X: np.ndarray,
                        y: LabelVector):
    """Fit the configured optimizer on training rows; returns the transform."""
    opt = config.optimizer
    if opt.kind == "none":
        return None
    if opt.kind == "pca":
        m = opt.params["m"]
        if m is None:
            m = components_for_variance(X, opt.params["variance_ratio"])
        m = min(m, X.shape[0] - 1, X.shape[1])
        return pca_fit(X, m)
    if opt.kind == "lda":
        return lda_fit(X, y, opt.params["shrinkage"])
    if opt.kind == "bfo":
        p = opt.params
        cfg = BfoConfig(
            population=p["population"],
            chemotaxis_steps=p["chemotaxis_steps"],
            swim_length=p["swim_length"],
            reproduction_steps=p["reproduction_steps"],
            dispersal_steps=p["dispersal_steps"],
            dispersal_prob=p["dispersal_prob"],
            step_size=p["step_size"],
            threshold=p["threshold"],
            seed=config.seed,
        )
        objective = wrapper_fitness(X, y, learner_kind=p["wrapper_learner"],
                                    folds=p["wrapper_folds"], seed=config.seed)
        return bfo_select(X, y, objective, cfg)
    raise AssertionError(opt.kind)


def fit_chain(config: PipelineConfig, X_train, y_train: LabelVector) -> Chain:
    X = as_array(X_train)
    scaler = standardize_fit(X) if config.standardize else None
    Xs = standardize_apply(scaler, X) if scaler is not None else X
    transform = fit_transform_stage(config, Xs, y_train)
    Xt = apply_transform(transform, Xs)
    classifier = fit(config.classifier, Xt, y_train)
    return Chain(scaler=scaler, transform=transform, classifier=classifier,
                 class_names=y_train.class_names)
