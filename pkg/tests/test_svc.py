from __future__ import annotations

import numpy as np
import pytest

from strokekit.learn import LearnerSpec, fit, predict
from strokekit.learn.svc import linear_kernel, rbf_kernel, resolve_gamma
from conftest import make_blobs


def kkt_violations(model, pair, X, y):
    """Recompute the Platt KKT conditions for one binary subproblem."""
    a, b = pair["i"], pair["j"]
    ca, cb = model.classes[a], model.classes[b]
    mask = (y == ca) | (y == cb)
    Xp = X[mask]
    yp = np.where(y[mask] == ca, 1.0, -1.0)
    kfun = rbf_kernel if model.kernel == "rbf" else linear_kernel
    dec = kfun(Xp, pair["sv_x"], model.gamma_value) @ pair["coef"] + pair["bias"]
    err = dec - yp

    violations = 0
    for idx in range(yp.size):
        r = yp[idx] * err[idx]
        alpha = _alpha_of(Xp[idx], pair)  # non-support rows have alpha = 0
        if alpha < model.C - 1e-12 and r < -model.tol:
            violations += 1
        if alpha > 1e-12 and r > model.tol:
            violations += 1
    return violations


def _alpha_of(x, pair):
    hits = np.flatnonzero(np.all(pair["sv_x"] == x, axis=1))
    return float(np.abs(pair["coef"][hits[0]])) if hits.size else 0.0


class TestSvcBinary:
    def test_separable_linear_perfect_and_margins(self):
        rng = np.random.default_rng(0)
        X = np.vstack([rng.normal(size=(40, 2)) + [-4, 0],
                       rng.normal(size=(40, 2)) + [4, 0]])
        y = np.repeat([0, 1], 40)
        spec = LearnerSpec(kind="svc", hyperparams={"kernel": "linear", "C": 10.0})
        model = fit(spec, X, y)
        assert np.mean(predict(model, X) == y) == 1.0
        # hinge margins: non-bound points classify with functional margin >= 1 - tol
        pair = model.pairs[0]
        dec = linear_kernel(X, pair["sv_x"], 0.0) @ pair["coef"] + pair["bias"]
        signs = np.where(y == 0, 1.0, -1.0)
        alphas = np.array([_alpha_of(x, pair) for x in X])
        free = alphas < 10.0 - 1e-9
        assert np.all(signs[free] * dec[free] >= 1.0 - model.tol - 1e-9)

    def test_kkt_conditions_hold_after_training(self):
        X, y = make_blobs(n_per_class=40, seed=5)
        model = fit(LearnerSpec(kind="svc", seed=3), X, y)
        for pair in model.pairs:
            assert pair["converged"]
            assert kkt_violations(model, pair, X, y) == 0

    def test_dual_box_and_equality_constraints(self):
        X, y = make_blobs(n_per_class=40, n_classes=2, seed=6)
        spec = LearnerSpec(kind="svc", hyperparams={"C": 1.0}, seed=1)
        model = fit(spec, X, y)
        pair = model.pairs[0]
        alphas = np.abs(pair["coef"])
        assert np.all(alphas >= -1e-12)
        assert np.all(alphas <= model.C + 1e-12)
        assert abs(pair["coef"].sum()) <= model.tol

    def test_rbf_nonlinear_ring(self):
        rng = np.random.default_rng(7)
        theta = rng.uniform(0, 2 * np.pi, size=120)
        inner = np.column_stack([0.5 * np.cos(theta[:60]), 0.5 * np.sin(theta[:60])])
        outer = np.column_stack([3.0 * np.cos(theta[60:]), 3.0 * np.sin(theta[60:])])
        X = np.vstack([inner, outer]) + rng.normal(scale=0.05, size=(120, 2))
        y = np.repeat([0, 1], 60)
        model = fit(LearnerSpec(kind="svc", hyperparams={"gamma": 1.0}), X, y)
        assert np.mean(predict(model, X) == y) >= 0.99


class TestSvcMulticlass:
    def test_vote_tiebreak_uses_decision_sums(self):
        X, y = make_blobs(n_per_class=50, n_classes=3, seed=8)
        model = fit(LearnerSpec(kind="svc", seed=2), X, y)
        scores = model.predict_scores(X)
        # perturbation never overturns a full vote
        votes = np.zeros_like(scores)
        for pair in model.pairs:
            dec = model._pair_decision(pair, X)
            votes[dec >= 0, pair["i"]] += 1
            votes[dec < 0, pair["j"]] += 1
        vote_best = votes.max(axis=1, keepdims=True) - votes
        loses_vote = vote_best >= 1
        best = np.argmax(scores, axis=1)
        assert not np.any(loses_vote[np.arange(len(best)), best])

    def test_gamma_scale_resolution(self):
        rng = np.random.default_rng(9)
        X = rng.normal(scale=2.0, size=(30, 4))
        assert resolve_gamma("scale", X) == pytest.approx(1.0 / (4 * X.var()))
        assert resolve_gamma(0.25, X) == 0.25
        flat = np.ones((5, 4))
        assert resolve_gamma("scale", flat) == pytest.approx(0.25)
