"""Kernel SVC trained with pairwise (one-vs-one) sequential minimal optimization.

Each class pair gets a binary SMO solve with Platt's working-pair
heuristics; random starts come from the seeded generator so fits are
reproducible. Multiclass prediction counts pair votes; exact vote ties are
broken by the summed signed decision values, folded into the score vector
as a sub-vote perturbation so argmax(scores) always equals predict.
"""

from __future__ import annotations

import numpy as np

from .base import TrainedClassifier
from ..serialize import decode_array, encode_array

_MIN_ALPHA_STEP = 1e-12
_MAX_SWEEPS = 1_000


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    d2 = (
        np.sum(A ** 2, axis=1, keepdims=True)
        - 2.0 * A @ B.T
        + np.sum(B ** 2, axis=1)
    )
    return np.exp(-gamma * np.maximum(d2, 0.0))


def linear_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    return A @ B.T


_KERNELS = {"rbf": rbf_kernel, "linear": linear_kernel}


def resolve_gamma(setting, X: np.ndarray) -> float:
    if setting == "scale":
        var = float(X.var())
        return 1.0 / (X.shape[1] * var) if var > 0.0 else 1.0 / X.shape[1]
    return float(setting)


def smo_solve(K: np.ndarray, y: np.ndarray, C: float, tol: float,
              max_passes: int, rng: np.random.Generator
              ) -> tuple[np.ndarray, float, bool]:
    """Solve the binary SVM dual for labels y in {-1,+1}.

    Working-pair selection follows Platt: for a KKT-violating first
    multiplier, try the partner maximizing |E1 - E2|, then every non-bound
    point from a random start, then every point, before giving up on it.
    Terminates after `max_passes` consecutive full sweeps without an
    update, at which point every point satisfies the KKT conditions
    within tol. Returns (alphas, bias, converged).
    """
    n = y.size
    alphas = np.zeros(n)
    state = {"b": 0.0}

    def decision(i: int) -> float:
        return float((alphas * y) @ K[:, i] + state["b"])

    def take_step(i: int, j: int, e_i: float) -> bool:
        if i == j:
            return False
        e_j = decision(j) - y[j]
        a_i, a_j = alphas[i], alphas[j]
        if y[i] != y[j]:
            low, high = max(0.0, a_j - a_i), min(C, C + a_j - a_i)
        else:
            low, high = max(0.0, a_i + a_j - C), min(C, a_i + a_j)
        if high - low < _MIN_ALPHA_STEP:
            return False
        eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
        if eta >= 0.0:
            return False
        new_j = float(np.clip(a_j - y[j] * (e_i - e_j) / eta, low, high))
        if abs(new_j - a_j) < _MIN_ALPHA_STEP:
            return False
        new_i = a_i + y[i] * y[j] * (a_j - new_j)
        alphas[i], alphas[j] = new_i, new_j
        b = state["b"]
        b1 = b - e_i - y[i] * (new_i - a_i) * K[i, i] \
            - y[j] * (new_j - a_j) * K[i, j]
        b2 = b - e_j - y[i] * (new_i - a_i) * K[i, j] \
            - y[j] * (new_j - a_j) * K[j, j]
        if 0.0 < new_i < C:
            state["b"] = b1
        elif 0.0 < new_j < C:
            state["b"] = b2
        else:
            state["b"] = 0.5 * (b1 + b2)
        return True

    def examine(i: int) -> bool:
        e_i = decision(i) - y[i]
        r = y[i] * e_i
        if not ((r < -tol and alphas[i] < C) or (r > tol and alphas[i] > 0)):
            return False
        non_bound = np.flatnonzero((alphas > 0.0) & (alphas < C))
        if non_bound.size > 1:
            errors = np.array([decision(j) - y[j] for j in non_bound])
            j = int(non_bound[np.argmax(np.abs(e_i - errors))])
            if take_step(i, j, e_i):
                return True
        if non_bound.size:
            start = int(rng.integers(non_bound.size))
            for k in range(non_bound.size):
                if take_step(i, int(non_bound[(start + k) % non_bound.size]), e_i):
                    return True
        start = int(rng.integers(n))
        for k in range(n):
            if take_step(i, (start + k) % n, e_i):
                return True
        return False

    passes = 0
    sweeps = 0
    while passes < max_passes and sweeps < _MAX_SWEEPS:
        changed = sum(examine(i) for i in range(n))
        sweeps += 1
        passes = passes + 1 if changed == 0 else 0

    # pin the intercept to the free support vectors when any exist
    free = (alphas > _MIN_ALPHA_STEP) & (alphas < C - _MIN_ALPHA_STEP)
    if free.any():
        raw = (alphas * y) @ K
        state["b"] = float(np.mean(y[free] - raw[free]))
    return alphas, state["b"], passes >= max_passes


class SvcModel(TrainedClassifier):
    kind = "svc"

    def __init__(self, classes, n_features, kernel, gamma_value, C, tol, pairs):
        super().__init__(classes, n_features)
        self.kernel = kernel
        self.gamma_value = float(gamma_value)
        self.C = float(C)
        self.tol = float(tol)
        # pairs: list of dicts {i, j, sv_x, coef, bias, converged} in class order
        self.pairs = pairs

    def _pair_decision(self, pair: dict, X: np.ndarray) -> np.ndarray:
        kfun = _KERNELS[self.kernel]
        if pair["sv_x"].shape[0] == 0:
            return np.full(X.shape[0], pair["bias"])
        return kfun(X, pair["sv_x"], self.gamma_value) @ pair["coef"] + pair["bias"]

    def predict_scores(self, X) -> np.ndarray:
        X = self._check(X)
        n, c = X.shape[0], self.n_classes
        votes = np.zeros((n, c))
        conf = np.zeros((n, c))
        for pair in self.pairs:
            dec = self._pair_decision(pair, X)
            i, j = pair["i"], pair["j"]
            wins_i = dec >= 0.0  # exact zero goes to the lower class index
            votes[wins_i, i] += 1.0
            votes[~wins_i, j] += 1.0
            conf[:, i] += dec
            conf[:, j] -= dec
        # decision sums break exact vote ties; the perturbation stays below
        # 1/3 so it can never overturn a whole vote, and the 1/3 shift keeps
        # scores non-negative before normalization
        raw = votes + conf / (3.0 * (np.abs(conf) + 1.0)) + 1.0 / 3.0
        return raw / raw.sum(axis=1, keepdims=True)

    def to_payload(self) -> dict:
        return {
            "kind": self.kind,
            "classes": self.classes.tolist(),
            "n_features": self.n_features,
            "kernel": self.kernel,
            "gamma_value": self.gamma_value,
            "C": self.C,
            "tol": self.tol,
            "pairs": [
                {
                    "i": p["i"], "j": p["j"],
                    "sv_x": encode_array(p["sv_x"]),
                    "coef": encode_array(p["coef"]),
                    "bias": p["bias"],
                    "converged": p["converged"],
                }
                for p in self.pairs
            ],
        }

    @staticmethod
    def from_payload(payload: dict) -> "SvcModel":
        pairs = [
            {
                "i": p["i"], "j": p["j"],
                "sv_x": decode_array(p["sv_x"]),
                "coef": decode_array(p["coef"]),
                "bias": float(p["bias"]),
                "converged": bool(p["converged"]),
            }
            for p in payload["pairs"]
        ]
        return SvcModel(
            np.asarray(payload["classes"]), payload["n_features"],
            payload["kernel"], payload["gamma_value"], payload["C"],
            payload["tol"], pairs,
        )


def fit_svc(X: np.ndarray, codes: np.ndarray, classes: np.ndarray,
            kernel: str, gamma, C: float, tol: float, max_passes: int,
            seed: int) -> SvcModel:
    gamma_value = resolve_gamma(gamma, X)
    kfun = _KERNELS[kernel]
    rng = np.random.default_rng(seed)
    pairs = []
    for a in range(classes.size):
        for bcls in range(a + 1, classes.size):
            mask = (codes == classes[a]) | (codes == classes[bcls])
            Xp = X[mask]
            yp = np.where(codes[mask] == classes[a], 1.0, -1.0)
            K = kfun(Xp, Xp, gamma_value)
            alphas, bias, converged = smo_solve(K, yp, C, tol, max_passes, rng)
            sv = alphas > 0.0
            pairs.append({
                "i": a, "j": bcls,
                "sv_x": Xp[sv],
                "coef": alphas[sv] * yp[sv],
                "bias": float(bias),
                "converged": bool(converged),
            })
    return SvcModel(classes, X.shape[1], kernel, gamma_value, C, tol, pairs)
