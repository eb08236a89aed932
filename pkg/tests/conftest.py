from __future__ import annotations

import numpy as np
import pytest

from strokekit.data import (
    CANONICAL_LABELS,
    FeatureMatrix,
    LabelVector,
    SplitAssignment,
    save_features,
)


def make_blobs(n_per_class=100, n_classes=3, n_features=2, spread=1.0,
               separation=6.0, seed=42):
    """Well-separated gaussian blobs; shuffled, deterministic."""
    rng = np.random.default_rng(seed)
    angles = np.linspace(0.0, 2.0 * np.pi, n_classes, endpoint=False)
    X_parts, y_parts = [], []
    for c, ang in enumerate(angles):
        center = np.zeros(n_features)
        center[0] = separation * np.cos(ang)
        center[min(1, n_features - 1)] += separation * np.sin(ang)
        X_parts.append(rng.normal(scale=spread, size=(n_per_class, n_features)) + center)
        y_parts.append(np.full(n_per_class, c))
    X = np.vstack(X_parts)
    y = np.concatenate(y_parts)
    perm = rng.permutation(X.shape[0])
    return X[perm], y[perm]


@pytest.fixture
def blobs3():
    return make_blobs()


def write_feature_csv(path, X, y_codes, class_names=None, split_tags=None,
                      sample_ids=None):
    class_names = class_names or CANONICAL_LABELS
    X = np.asarray(X, dtype=np.float64)
    ids = sample_ids or tuple(f"s{i:05d}" for i in range(X.shape[0]))
    matrix = FeatureMatrix(X, ids)
    labels = LabelVector(np.asarray(y_codes), class_names)
    split = SplitAssignment(np.asarray(split_tags)) if split_tags is not None else None
    save_features(path, matrix, labels, split)
    return path


@pytest.fixture
def blob_csv(tmp_path, blobs3):
    X, y = blobs3
    return write_feature_csv(tmp_path / "features.csv", X, y)
