from __future__ import annotations

import math

import numpy as np

from strokekit.learn import LearnerSpec, fit, predict, predict_scores


class TestGaussianNB:
    def test_hand_computed_statistics_and_posterior(self):
        # 6 points, 2 classes, 1-D
        X = np.array([[1.0], [2.0], [3.0], [10.0], [11.0], [12.0]])
        y = np.array([0, 0, 0, 1, 1, 1])
        spec = LearnerSpec(kind="gnb")
        model = fit(spec, X, y)

        eps = spec["var_smoothing"] * X.var(axis=0).max()
        np.testing.assert_allclose(model.means[:, 0], [2.0, 11.0])
        np.testing.assert_allclose(model.variances[:, 0],
                                   [2.0 / 3.0 + eps, 2.0 / 3.0 + eps])

        # closed-form Bayes oracle at a probe point
        probe = 4.0

        def gauss(x, mu, var):
            return math.exp(-(x - mu) ** 2 / (2 * var)) / math.sqrt(2 * math.pi * var)

        lik0 = 0.5 * gauss(probe, 2.0, 2.0 / 3.0 + eps)
        lik1 = 0.5 * gauss(probe, 11.0, 2.0 / 3.0 + eps)
        want = np.array([lik0, lik1]) / (lik0 + lik1)
        got = predict_scores(model, np.array([[probe]]))[0]
        np.testing.assert_allclose(got, want, rtol=1e-12)

    def test_equidistant_probe_splits_posterior(self):
        X = np.array([[-3.0], [-1.0], [1.0], [3.0]])
        y = np.array([0, 0, 1, 1])
        model = fit(LearnerSpec(kind="gnb"), X, y)
        scores = predict_scores(model, np.array([[0.0]]))[0]
        np.testing.assert_allclose(scores, [0.5, 0.5], atol=1e-9)

    def test_log_domain_stability(self):
        # huge separation would underflow naive likelihood products
        rng = np.random.default_rng(0)
        X = np.vstack([rng.normal(size=(20, 30)),
                       rng.normal(size=(20, 30)) + 1e3])
        y = np.repeat([0, 1], 20)
        model = fit(LearnerSpec(kind="gnb"), X, y)
        scores = predict_scores(model, X)
        assert np.all(np.isfinite(scores))
        assert np.mean(predict(model, X) == y) == 1.0


class TestKnn:
    def test_probe_on_training_point(self):
        X = np.array([[0.0, 0.0], [5.0, 5.0], [9.0, 0.0]])
        y = np.array([2, 0, 1])
        model = fit(LearnerSpec(kind="knn", hyperparams={"k": 1}), X, y)
        assert predict(model, np.array([[5.0, 5.0]]))[0] == 0

    def test_three_neighbor_majority_brute_force(self):
        X = np.array([[0.0], [1.0], [2.0], [10.0], [11.0]])
        y = np.array([0, 0, 1, 1, 1])
        model = fit(LearnerSpec(kind="knn", hyperparams={"k": 3}), X, y)
        probes = np.array([[1.4], [9.0], [4.0]])
        # oracle: exhaustive distance sort per probe
        want = []
        for p in probes[:, 0]:
            order = np.argsort(np.abs(X[:, 0] - p), kind="stable")[:3]
            votes = np.bincount(y[order], minlength=2)
            want.append(int(np.argmax(votes)))
        np.testing.assert_array_equal(predict(model, probes), want)

    def test_radius_inclusive_tie_at_kth(self):
        # probe at 0: distances 1,1,1,1 with k=2 -> all four tied points vote
        X = np.array([[1.0], [-1.0], [1.0], [-1.0], [5.0]])
        y = np.array([0, 1, 1, 1, 0])
        model = fit(LearnerSpec(kind="knn", hyperparams={"k": 2}), X, y)
        scores = predict_scores(model, np.array([[0.0]]))[0]
        np.testing.assert_allclose(scores, [0.25, 0.75])
        assert predict(model, np.array([[0.0]]))[0] == 1

    def test_vote_tie_lowest_class(self):
        X = np.array([[-1.0], [1.0]])
        y = np.array([1, 0])
        model = fit(LearnerSpec(kind="knn", hyperparams={"k": 2}), X, y)
        assert predict(model, np.array([[0.0]]))[0] == 0


class TestLogisticRegression:
    def test_softmax_rows_sum_to_one(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(60, 4))
        y = rng.integers(0, 3, size=60)
        model = fit(LearnerSpec(kind="lr"), X, y)
        scores = predict_scores(model, rng.normal(size=(40, 4)))
        np.testing.assert_allclose(scores.sum(axis=1), 1.0, atol=1e-9)

    def test_convergence_reported(self):
        rng = np.random.default_rng(2)
        X = np.vstack([rng.normal(size=(40, 2)) + [-3, 0],
                       rng.normal(size=(40, 2)) + [3, 0]])
        y = np.repeat([0, 1], 40)
        model = fit(LearnerSpec(kind="lr"), X, y)
        assert model.converged or model.n_iter == 500

    def test_matches_closed_form_on_balanced_symmetric(self):
        # symmetric two-class data: decision boundary must pass through 0
        X = np.array([[ -2.0], [-1.0], [1.0], [2.0]])
        y = np.array([0, 0, 1, 1])
        model = fit(LearnerSpec(kind="lr", hyperparams={"l2": 1e-3}), X, y)
        scores = predict_scores(model, np.array([[0.0]]))[0]
        np.testing.assert_allclose(scores, [0.5, 0.5], atol=1e-6)

    def test_gradient_norm_small_after_convergence(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(50, 3))
        y = rng.integers(0, 2, size=50)
        spec = LearnerSpec(kind="lr", hyperparams={"tol": 1e-8})
        model = fit(spec, X, y)
        if model.converged:
            # recompute the gradient at the reported optimum
            W, b = model.weights, model.bias
            logits = X @ W.T + b
            logits -= logits.max(axis=1, keepdims=True)
            P = np.exp(logits) / np.exp(logits).sum(axis=1, keepdims=True)
            onehot = np.zeros_like(P)
            onehot[np.arange(50), y] = 1.0
            gW = (P - onehot).T @ X / 50 + spec["l2"] * W
            gb = (P - onehot).mean(axis=0)
            norm = np.sqrt(np.sum(gW ** 2) + np.sum(gb ** 2))
            assert norm <= 1e-8 * 1.01
