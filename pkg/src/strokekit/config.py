"""Declarative pipeline configuration.

A config is a plain nested dict on disk (JSON); loading materializes every
default so the snapshot stored in a run record is self-contained. The seed
is mandatory: nothing in the pipeline draws entropy from the environment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ValidationError
from .learn import LearnerSpec

EXTRACTOR_TAGS = ("DenseNet201", "InceptionV3", "MobileNetV2",
                  "ResNet50", "Xception")

OPTIMIZER_KINDS = ("none", "bfo", "pca", "lda")

_OPTIMIZER_DEFAULTS: dict[str, dict] = {
    "none": {},
    "pca": {"m": None, "variance_ratio": 0.95},
    "lda": {"shrinkage": 1e-3},
    "bfo": {
        "population": 20,
        "chemotaxis_steps": 30,
        "swim_length": 4,
        "reproduction_steps": 4,
        "dispersal_steps": 2,
        "dispersal_prob": 0.25,
        "step_size": 0.4,
        "threshold": 0.5,
        "wrapper_learner": "knn",
        "wrapper_folds": 3,
    },
}


@dataclass(frozen=True)
class OptimizerSpec:
    kind: str = "none"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        kind = str(self.kind).lower()
        if kind not in OPTIMIZER_KINDS:
            raise ValidationError(
                f"unknown optimizer {self.kind!r} (expected one of {OPTIMIZER_KINDS})")
        defaults = dict(_OPTIMIZER_DEFAULTS[kind])
        for name, value in self.params.items():
            if name not in defaults:
                raise ValidationError(
                    f"unknown optimizer parameter {name!r} for {kind}")
            defaults[name] = value
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "params", defaults)

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params}

    @staticmethod
    def from_dict(obj: dict | str | None) -> "OptimizerSpec":
        if obj is None:
            return OptimizerSpec("none")
        if isinstance(obj, str):
            return OptimizerSpec(obj)
        obj = dict(obj)
        kind = obj.pop("kind", "none")
        return OptimizerSpec(kind, obj)


@dataclass(frozen=True)
class EvaluationSpec:
    mode: str = "kfold"          # "kfold" or "holdout"
    k: int = 10
    fractions: tuple = (0.7, 0.15, 0.15)  # holdout without a split column

    def __post_init__(self):
        if self.mode not in ("kfold", "holdout"):
            raise ValidationError(f"evaluation mode must be kfold or holdout, got {self.mode!r}")
        if self.mode == "kfold" and self.k < 2:
            raise ValidationError(f"k must be >= 2, got {self.k}")
        object.__setattr__(self, "fractions", tuple(float(f) for f in self.fractions))

    def to_dict(self) -> dict:
        return {"mode": self.mode, "k": self.k, "fractions": list(self.fractions)}

    @staticmethod
    def from_dict(obj: dict | None) -> "EvaluationSpec":
        if obj is None:
            return EvaluationSpec()
        return EvaluationSpec(mode=obj.get("mode", "kfold"),
                              k=int(obj.get("k", 10)),
                              fractions=tuple(obj.get("fractions", (0.7, 0.15, 0.15))))


@dataclass(frozen=True)
class PipelineConfig:
    features_path: str
    classifier: LearnerSpec
    seed: int
    optimizer: OptimizerSpec = OptimizerSpec("none")
    extractor_tag: str = "other"
    standardize: bool = True
    evaluation: EvaluationSpec = EvaluationSpec()
    averaging: str = "macro"

    def __post_init__(self):
        if self.seed is None:
            raise ValidationError("seed is mandatory")
        if self.averaging not in ("macro", "weighted"):
            raise ValidationError("averaging must be macro or weighted")

    def to_dict(self) -> dict:
        """Fully materialized snapshot (all defaults expanded)."""
        return {
            "features_path": str(self.features_path),
            "extractor_tag": self.extractor_tag,
            "optimizer": self.optimizer.to_dict(),
            "classifier": self.classifier.to_payload(),
            "standardize": bool(self.standardize),
            "seed": int(self.seed),
            "evaluation": self.evaluation.to_dict(),
            "averaging": self.averaging,
        }

    @staticmethod
    def from_dict(obj: dict) -> "PipelineConfig":
        if "seed" not in obj:
            raise ValidationError("config must declare a seed")
        if "classifier" not in obj:
            raise ValidationError("config must declare a classifier")
        clf = obj["classifier"]
        if isinstance(clf, str):
            clf = {"kind": clf}
        clf = dict(clf)
        kind = clf.pop("kind", None)
        if kind is None:
            raise ValidationError("classifier must declare a kind")
        clf_seed = clf.pop("seed", obj["seed"])
        hp = clf.pop("hyperparams", None)
        if hp is None:
            hp = clf  # inline hyperparameters
        spec = LearnerSpec(kind=kind, hyperparams=hp, seed=int(clf_seed))
        return PipelineConfig(
            features_path=str(obj.get("features_path", obj.get("features", ""))),
            classifier=spec,
            seed=int(obj["seed"]),
            optimizer=OptimizerSpec.from_dict(obj.get("optimizer")),
            extractor_tag=str(obj.get("extractor_tag", obj.get("extractor", "other"))),
            standardize=bool(obj.get("standardize", True)),
            evaluation=EvaluationSpec.from_dict(obj.get("evaluation")),
            averaging=obj.get("averaging", "macro"),
        )
