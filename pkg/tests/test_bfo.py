from __future__ import annotations

import itertools

import numpy as np
import pytest

from strokekit.data import LabelVector
from strokekit.errors import ValidationError
from strokekit.reduce import (
    BfoConfig,
    bfo_minimize,
    bfo_select,
    position_to_mask,
    wrapper_fitness,
)

N_INFORMATIVE, N_NOISE = 4, 6


def subset_objective(mask: np.ndarray) -> float:
    """Reward informative columns, penalize noise columns (d = 10)."""
    mask = np.asarray(mask, dtype=bool)
    return float(mask[:N_INFORMATIVE].sum() - 0.5 * mask[N_INFORMATIVE:].sum())


def exhaustive_optimum():
    """Brute-force search over all 2^10 - 1 non-empty masks."""
    best_val, best_mask = -np.inf, None
    for bits in itertools.product([False, True], repeat=N_INFORMATIVE + N_NOISE):
        mask = np.asarray(bits)
        if not mask.any():
            continue
        val = subset_objective(mask)
        if val > best_val:
            best_val, best_mask = val, mask
    return best_mask, best_val


def small_cfg(seed, **overrides):
    params = dict(population=10, chemotaxis_steps=15, swim_length=3,
                  reproduction_steps=3, dispersal_steps=2, dispersal_prob=0.25,
                  step_size=0.15, threshold=0.5, seed=seed)
    params.update(overrides)
    return BfoConfig(**params)


def selection_cfg(seed):
    """Generous budget for the d=10 exhaustive-oracle task."""
    return BfoConfig(population=20, chemotaxis_steps=30, swim_length=4,
                     reproduction_steps=4, dispersal_steps=2,
                     dispersal_prob=0.25, step_size=0.4, threshold=0.5,
                     seed=seed)


class TestBfoSelect:
    def test_matches_exhaustive_optimum(self):
        oracle_mask, oracle_val = exhaustive_optimum()
        X = np.zeros((4, 10))
        y = LabelVector(np.array([0, 0, 1, 1]), ("a", "b"))
        result = bfo_select(X, y, subset_objective, selection_cfg(seed=1))
        assert result.fitness == oracle_val
        np.testing.assert_array_equal(result.selected, oracle_mask)

    def test_constant_objective(self):
        X = np.zeros((4, 6))
        y = LabelVector(np.array([0, 0, 1, 1]), ("a", "b"))
        result = bfo_select(X, y, lambda mask: 2.5, small_cfg(seed=3))
        assert result.fitness == 2.5
        assert result.selected.any()

    def test_mask_never_empty(self):
        # objective prefers fewer features, pushing positions to zero
        X = np.zeros((4, 5))
        y = LabelVector(np.array([0, 0, 1, 1]), ("a", "b"))
        result = bfo_select(X, y, lambda m: -float(np.sum(m)), small_cfg(seed=5))
        assert result.n_selected >= 1
        assert result.fitness == -1.0

    def test_threshold_forcing(self):
        mask = position_to_mask(np.array([0.1, 0.4, 0.2]), threshold=0.5)
        assert mask.tolist() == [False, True, False]
        mask = position_to_mask(np.array([0.9, 0.6, 0.2]), threshold=0.5)
        assert mask.tolist() == [True, True, False]

    def test_deterministic_under_seed(self):
        X = np.zeros((4, 10))
        y = LabelVector(np.array([0, 0, 1, 1]), ("a", "b"))
        a = bfo_select(X, y, subset_objective, small_cfg(seed=9))
        b = bfo_select(X, y, subset_objective, small_cfg(seed=9))
        np.testing.assert_array_equal(a.selected, b.selected)
        assert a.fitness == b.fitness

    def test_evaluation_budget(self):
        calls = {"n": 0}

        def counting(mask):
            calls["n"] += 1
            return subset_objective(mask)

        cfg = small_cfg(seed=2)
        X = np.zeros((4, 10))
        y = LabelVector(np.array([0, 0, 1, 1]), ("a", "b"))
        bfo_select(X, y, counting, cfg)
        s, nc, ns = cfg.population, cfg.chemotaxis_steps, cfg.swim_length
        nre, ned = cfg.reproduction_steps, cfg.dispersal_steps
        assert calls["n"] <= s * nc * (ns + 1) * nre * ned + s * ned

    def test_config_invariants(self):
        with pytest.raises(ValidationError):
            small_cfg(seed=0, population=7)  # odd
        with pytest.raises(ValidationError):
            small_cfg(seed=0, dispersal_prob=0.0)
        with pytest.raises(ValidationError):
            small_cfg(seed=0, step_size=-1.0)
        with pytest.raises(ValidationError):
            small_cfg(seed=0, chemotaxis_steps=0)


class TestBfoContinuous:
    def test_sphere_function(self):
        cfg = BfoConfig(population=20, chemotaxis_steps=50, swim_length=4,
                        reproduction_steps=4, dispersal_steps=2,
                        dispersal_prob=0.25, step_size=0.1, threshold=0.5,
                        seed=7)
        run = bfo_minimize(lambda x: float(np.sum(x * x)), 5, -1.0, 1.0, cfg)
        assert np.linalg.norm(run.best_position) <= 1e-2

    def test_elitist_history_monotone(self):
        cfg = small_cfg(seed=4)
        run = bfo_minimize(lambda x: float(np.sum(np.abs(x))), 4, -2.0, 2.0, cfg)
        hist = run.history
        assert len(hist) == (cfg.chemotaxis_steps * cfg.reproduction_steps
                             * cfg.dispersal_steps)
        assert all(a >= b for a, b in zip(hist, hist[1:]))

    def test_budget_bound_continuous(self):
        calls = {"n": 0}

        def f(x):
            calls["n"] += 1
            return float(np.sum(x * x))

        cfg = small_cfg(seed=6)
        bfo_minimize(f, 3, 0.0, 1.0, cfg)
        s, nc, ns = cfg.population, cfg.chemotaxis_steps, cfg.swim_length
        nre, ned = cfg.reproduction_steps, cfg.dispersal_steps
        assert calls["n"] <= s * nc * (ns + 1) * nre * ned + s * ned


class TestWrapperFitness:
    def test_separating_column_scores_one(self):
        rng = np.random.default_rng(0)
        n = 30
        sep = np.concatenate([np.zeros(n), np.ones(n) * 10.0])
        noise = rng.normal(size=2 * n)
        X = np.column_stack([sep + rng.normal(scale=0.01, size=2 * n), noise])
        y = LabelVector(np.repeat([0, 1], n), ("a", "b"))
        fitness = wrapper_fitness(X, y, learner_kind="knn", folds=3, seed=1,
                                  hyperparams={"k": 1})
        assert fitness(np.array([True, False])) == 1.0

    def test_noise_columns_near_chance(self):
        rng = np.random.default_rng(1)
        n = 60
        X = rng.normal(size=(3 * n, 4))
        y = LabelVector(np.repeat([0, 1, 2], n), ("a", "b", "c"))
        fitness = wrapper_fitness(X, y, folds=3, seed=2)
        value = fitness(np.ones(4, dtype=bool))
        assert abs(value - 1.0 / 3.0) <= 0.1

    def test_identical_mask_identical_fitness(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(40, 3))
        y = LabelVector(np.repeat([0, 1], 20), ("a", "b"))
        fitness = wrapper_fitness(X, y, folds=2, seed=3)
        mask = np.array([True, False, True])
        assert fitness(mask) == fitness(mask.copy())
