"""Principal component analysis via covariance eigendecomposition.

Uses the d x d covariance eigensolve when d <= n and the n x n Gram trick
otherwise, so fitting 1280-2048 wide feature matrices with a few thousand
rows never forms an oversized matrix. Variances follow the population
convention (divide by n) used everywhere in this package. Component signs
are fixed so the largest-magnitude entry of each row is positive, which
keeps fits reproducible across runs and platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import FeatureMatrix, as_array
from ..errors import DimensionMismatch, ValidationError
from ..serialize import decode_array, encode_array

_RANK_TOL = 1e-12


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray                # length d
    components: np.ndarray          # m x d, rows orthonormal
    explained_variance: np.ndarray  # length m, non-increasing, >= 0

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    @property
    def n_features(self) -> int:
        return self.components.shape[1]

    def to_payload(self) -> dict:
        return {
            "kind": "pca",
            "mean": encode_array(self.mean),
            "components": encode_array(self.components),
            "explained_variance": encode_array(self.explained_variance),
        }

    @staticmethod
    def from_payload(payload: dict) -> "PcaModel":
        return PcaModel(
            mean=decode_array(payload["mean"]),
            components=decode_array(payload["components"]),
            explained_variance=decode_array(payload["explained_variance"]),
        )


def _fix_signs(components: np.ndarray) -> np.ndarray:
    out = components.copy()
    for row in out:
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            row *= -1.0
    return out


def _complete_basis(components: np.ndarray, m: int, d: int) -> np.ndarray:
    """Extend a partial orthonormal row set to m rows (arbitrary completion)."""
    have = components.shape[0]
    if have >= m:
        return components[:m]
    basis = list(components)
    for j in range(d):
        if len(basis) == m:
            break
        cand = np.zeros(d)
        cand[j] = 1.0
        for b in basis:
            cand -= (cand @ b) * b
        norm = np.linalg.norm(cand)
        if norm > 1e-9:
            basis.append(cand / norm)
    return np.vstack(basis)


def pca_fit(X_train: np.ndarray | FeatureMatrix, m: int) -> PcaModel:
    """Fit the top-m principal directions of the training rows.

    Zero-variance directions are not an error: they carry explained
    variance 0 and the component set is completed to an orthonormal basis.
    """
    X = as_array(X_train)
    n, d = X.shape
    if not 1 <= m <= min(n - 1, d):
        raise ValidationError(
            f"m={m} outside 1..min(n_train-1, d)=min({n - 1}, {d})")

    mean = X.mean(axis=0)
    Xc = X - mean

    if d <= n:
        cov = (Xc.T @ Xc) / n
        eigvals, eigvecs = np.linalg.eigh(cov)
        order = np.argsort(eigvals, kind="stable")[::-1]
        variances = np.maximum(eigvals[order[:m]], 0.0)
        components = eigvecs[:, order[:m]].T
    else:
        gram = (Xc @ Xc.T) / n
        eigvals, eigvecs = np.linalg.eigh(gram)
        order = np.argsort(eigvals, kind="stable")[::-1]
        variances = []
        rows = []
        for idx in order[:m]:
            lam = max(float(eigvals[idx]), 0.0)
            direction = Xc.T @ eigvecs[:, idx]
            norm = np.linalg.norm(direction)
            if lam <= _RANK_TOL or norm <= _RANK_TOL:
                continue  # null direction; completed below
            variances.append(lam)
            rows.append(direction / norm)
        components = (np.vstack(rows) if rows else np.empty((0, d)))
        components = _complete_basis(components, m, d)
        variances = np.array(variances + [0.0] * (m - len(variances)))

    return PcaModel(
        mean=mean,
        components=_fix_signs(np.ascontiguousarray(components)),
        explained_variance=np.asarray(variances, dtype=np.float64),
    )


def pca_transform(model: PcaModel, X: np.ndarray | FeatureMatrix) -> np.ndarray:
    X = as_array(X)
    if X.shape[1] != model.n_features:
        raise DimensionMismatch(model.n_features, X.shape[1])
    return (X - model.mean) @ model.components.T


def components_for_variance(X_train: np.ndarray | FeatureMatrix,
                            ratio: float = 0.95) -> int:
    """Smallest m whose leading components explain >= ratio of total variance."""
    X = as_array(X_train)
    n, d = X.shape
    full = pca_fit(X, min(n - 1, d))
    total = full.explained_variance.sum()
    if total <= 0.0:
        return 1
    cum = np.cumsum(full.explained_variance) / total
    return int(np.searchsorted(cum, ratio - 1e-12) + 1)
