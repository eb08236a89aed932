"""Learner specification with a closed, validated hyperparameter set per kind."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import HyperparamOutOfRange, UnknownHyperparam, ValidationError

KINDS = ("svc", "rf", "gnb", "dt", "xgb", "knn", "lr")


def _positive(v):
    return isinstance(v, (int, float)) and v > 0


def _non_negative(v):
    return isinstance(v, (int, float)) and v >= 0


def _count(v):
    return isinstance(v, int) and not isinstance(v, bool) and v >= 1


# name -> (default, validator, constraint description)
_PARAMS: dict[str, dict[str, tuple]] = {
    "svc": {
        "kernel": ("rbf", lambda v: v in ("rbf", "linear"), "rbf or linear"),
        "C": (1.0, _positive, "> 0"),
        "gamma": ("scale", lambda v: v == "scale" or _positive(v),
                  "'scale' (1/(d*var)) or > 0"),
        "tol": (1e-3, _positive, "> 0"),
        "max_passes": (2, _count, ">= 1"),
    },
    "knn": {
        "k": (5, _count, ">= 1"),
        "metric": ("euclidean", lambda v: v == "euclidean", "euclidean"),
    },
    "dt": {
        "criterion": ("gini", lambda v: v == "gini", "gini"),
        "max_depth": (None, lambda v: v is None or _count(v), "None or >= 1"),
        "min_samples_leaf": (1, _count, ">= 1"),
        "min_impurity_decrease": (0.0, _non_negative, ">= 0"),
    },
    "rf": {
        "n_trees": (100, _count, ">= 1"),
        "max_features": ("sqrt", lambda v: v in ("sqrt", "all") or _count(v),
                         "'sqrt', 'all', or a count"),
        "bootstrap": (True, lambda v: isinstance(v, bool), "bool"),
        "max_depth": (None, lambda v: v is None or _count(v), "None or >= 1"),
    },
    "xgb": {
        "n_rounds": (100, _count, ">= 1"),
        "learning_rate": (0.3, lambda v: _positive(v) and v <= 1.0, "(0, 1]"),
        "max_depth": (6, _count, ">= 1"),
        "lambda": (1.0, _non_negative, ">= 0"),
        "gamma": (0.0, _non_negative, ">= 0"),
    },
    "lr": {
        "l2": (1e-4, _non_negative, ">= 0"),
        "max_iter": (500, _count, ">= 1"),
        "tol": (1e-6, _positive, "> 0"),
    },
    "gnb": {
        "var_smoothing": (1e-9, _positive, "> 0"),
    },
}


@dataclass(frozen=True)
class LearnerSpec:
    """One of the seven classifier kinds plus its full hyperparameter map.

    Unknown keys are rejected at construction; omitted keys take the
    documented defaults, so a spec is always complete and serializable.
    """

    kind: str
    hyperparams: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        kind = str(self.kind).lower()
        if kind not in KINDS:
            raise ValidationError(
                f"unknown learner kind {self.kind!r} (expected one of {KINDS})")
        table = _PARAMS[kind]
        merged = {}
        for name, (default, check, constraint) in table.items():
            merged[name] = default
        for name, value in self.hyperparams.items():
            if name not in table:
                raise UnknownHyperparam(kind, name, table)
            _, check, constraint = table[name]
            if not check(value):
                raise HyperparamOutOfRange(name, value, constraint)
            merged[name] = value
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "hyperparams", merged)

    def __getitem__(self, name: str):
        return self.hyperparams[name]

    def to_payload(self) -> dict:
        return {"kind": self.kind, "hyperparams": dict(self.hyperparams),
                "seed": int(self.seed)}

    @staticmethod
    def from_payload(payload: dict) -> "LearnerSpec":
        return LearnerSpec(kind=payload["kind"],
                           hyperparams=dict(payload.get("hyperparams", {})),
                           seed=int(payload.get("seed", 0)))
