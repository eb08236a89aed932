"""Random forest: bagged CART trees voting with hard votes."""

from __future__ import annotations

import numpy as np

from .base import TrainedClassifier, class_index
from .tree import FlatTree, build_cart


class RandomForestModel(TrainedClassifier):
    kind = "rf"

    def __init__(self, classes, n_features, trees: list[FlatTree]):
        super().__init__(classes, n_features)
        self.trees = trees

    def predict_scores(self, X) -> np.ndarray:
        X = self._check(X)
        votes = np.zeros((X.shape[0], self.n_classes))
        for tree in self.trees:
            counts = tree.leaf_counts(X)
            winner = np.argmax(counts, axis=1)  # first max = lowest class
            votes[np.arange(X.shape[0]), winner] += 1.0
        return votes / len(self.trees)

    def to_payload(self) -> dict:
        return {
            "kind": self.kind,
            "classes": self.classes.tolist(),
            "n_features": self.n_features,
            "trees": [t.to_payload() for t in self.trees],
        }

    @staticmethod
    def from_payload(payload: dict) -> "RandomForestModel":
        return RandomForestModel(
            np.asarray(payload["classes"]), payload["n_features"],
            [FlatTree.from_payload(t) for t in payload["trees"]],
        )


def resolve_max_features(setting, d: int) -> int:
    if setting == "sqrt":
        return max(1, int(np.sqrt(d)))
    if setting == "all":
        return d
    return min(int(setting), d)


def fit_rf(X: np.ndarray, codes: np.ndarray, classes: np.ndarray,
           n_trees: int, max_features, bootstrap: bool, max_depth,
           seed: int) -> RandomForestModel:
    y_pos = class_index(classes, codes)
    n, d = X.shape
    mf = resolve_max_features(max_features, d)
    streams = np.random.SeedSequence(seed).spawn(n_trees)
    trees = []
    for ss in streams:
        rng = np.random.default_rng(ss)
        idx = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        tree = build_cart(
            X[idx], y_pos[idx], classes.size,
            max_depth=max_depth, min_samples_leaf=1,
            min_impurity_decrease=0.0,
            rng=rng, max_features=mf if mf < d else None,
        )
        trees.append(tree)
    return RandomForestModel(classes, d, trees)
