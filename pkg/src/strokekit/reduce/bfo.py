"""Bacterial foraging optimization used as a wrapper feature selector.

Bacteria live in a continuous box; for feature selection that box is
[0, 1]^d and a candidate mask is the coordinates above a threshold (an
all-false mask forces the single highest coordinate on, so masks are
never empty). Each chemotaxis step is a tumble (random unit direction
scaled by the step size) followed by swims in the same direction while
the objective keeps improving, up to the swim length. Reproduction keeps
the healthiest half of the population and duplicates it; elimination-
dispersal teleports bacteria with a fixed probability. The step size is
halved after every reproduction event so late generations refine instead
of wander; best-so-far bookkeeping is elitist and monotone.

Objective evaluations are bounded by
S*N_c*(N_s+1)*N_re*N_ed + S*N_ed for a full run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..data import FeatureMatrix, LabelVector, as_array, stratified_kfold
from ..errors import ValidationError


@dataclass(frozen=True)
class BfoConfig:
    population: int = 20        # S; even, reproduction halves then duplicates
    chemotaxis_steps: int = 30  # N_c
    swim_length: int = 4        # N_s
    reproduction_steps: int = 4  # N_re
    dispersal_steps: int = 2    # N_ed
    dispersal_prob: float = 0.25  # P_ed
    step_size: float = 0.4      # large enough to flip unit-box coordinates
    threshold: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.population < 2 or self.population % 2 != 0:
            raise ValidationError(
                f"population must be even and >= 2, got {self.population}")
        for name in ("chemotaxis_steps", "swim_length",
                     "reproduction_steps", "dispersal_steps"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be >= 1")
        if not 0.0 < self.dispersal_prob < 1.0:
            raise ValidationError("dispersal_prob must be in (0, 1)")
        if self.step_size <= 0.0:
            raise ValidationError("step_size must be positive")
        if not 0.0 < self.threshold < 1.0:
            raise ValidationError("threshold must be in (0, 1)")


@dataclass(frozen=True)
class FeatureMask:
    selected: np.ndarray  # boolean, length d, never all-false
    fitness: float

    def __post_init__(self):
        sel = np.array(self.selected, dtype=bool, copy=True)
        if not sel.any():
            raise ValidationError("feature mask selects no features")
        sel.flags.writeable = False
        object.__setattr__(self, "selected", sel)

    @property
    def n_selected(self) -> int:
        return int(self.selected.sum())

    def to_payload(self) -> dict:
        return {
            "kind": "mask",
            "n_features": int(self.selected.size),
            "selected_idx": [int(i) for i in np.flatnonzero(self.selected)],
            "fitness": float(self.fitness),
        }

    @staticmethod
    def from_payload(payload: dict) -> "FeatureMask":
        sel = np.zeros(payload["n_features"], dtype=bool)
        sel[payload["selected_idx"]] = True
        return FeatureMask(selected=sel, fitness=float(payload["fitness"]))


@dataclass
class BfoRun:
    """Outcome of one optimization run (minimization convention)."""

    best_position: np.ndarray
    best_value: float
    history: list[float] = field(default_factory=list)  # best-so-far per chemotaxis step
    n_evaluations: int = 0


def _unit_direction(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim)
    norm = np.linalg.norm(v)
    while norm < 1e-12:
        v = rng.standard_normal(dim)
        norm = np.linalg.norm(v)
    return v / norm


def bfo_minimize(fn: Callable[[np.ndarray], float], dim: int,
                 lower: float, upper: float, cfg: BfoConfig) -> BfoRun:
    """Minimize fn over [lower, upper]^dim with the full BFO schedule."""
    rng = np.random.default_rng(cfg.seed)
    s = cfg.population
    pos = rng.uniform(lower, upper, size=(s, dim))
    run = BfoRun(best_position=pos[0].copy(), best_value=np.inf)

    def evaluate(x: np.ndarray) -> float:
        value = float(fn(x))
        run.n_evaluations += 1
        if value < run.best_value:
            run.best_value = value
            run.best_position = x.copy()
        return value

    fit = np.array([evaluate(pos[i]) for i in range(s)])
    step = cfg.step_size

    for ed in range(cfg.dispersal_steps):
        for _ in range(cfg.reproduction_steps):
            health = np.zeros(s)
            for _ in range(cfg.chemotaxis_steps):
                for i in range(s):
                    direction = _unit_direction(rng, dim)
                    last = fit[i]
                    pos[i] = np.clip(pos[i] + step * direction, lower, upper)
                    fit[i] = evaluate(pos[i])
                    swims = 0
                    while swims < cfg.swim_length and fit[i] < last:
                        last = fit[i]
                        pos[i] = np.clip(pos[i] + step * direction, lower, upper)
                        fit[i] = evaluate(pos[i])
                        swims += 1
                    health[i] += fit[i]
                run.history.append(run.best_value)
            # reproduction: healthiest half (lowest accumulated value) duplicates
            order = np.argsort(health, kind="stable")
            survivors = order[: s // 2]
            pos = np.concatenate([pos[survivors], pos[survivors]])
            fit = np.concatenate([fit[survivors], fit[survivors]])
            step *= 0.5
        if ed < cfg.dispersal_steps - 1:
            for i in range(s):
                if rng.random() < cfg.dispersal_prob:
                    pos[i] = rng.uniform(lower, upper, size=dim)
                    fit[i] = evaluate(pos[i])
    return run


def position_to_mask(position: np.ndarray, threshold: float) -> np.ndarray:
    mask = position > threshold
    if not mask.any():
        mask = mask.copy()
        mask[int(np.argmax(position))] = True
    return mask


def bfo_select(X: np.ndarray | FeatureMatrix, y: LabelVector | np.ndarray,
               objective: Callable[[np.ndarray], float],
               cfg: BfoConfig) -> FeatureMask:
    """Search for the feature mask maximizing `objective` (higher is better).

    Returns the best mask seen over the whole run; deterministic for a
    fixed config seed.
    """
    X = as_array(X)
    d = X.shape[1]
    if d < 1:
        raise ValidationError("need at least one feature column")

    def neg_objective(position: np.ndarray) -> float:
        mask = position_to_mask(position, cfg.threshold)
        return -float(objective(mask))

    run = bfo_minimize(neg_objective, d, 0.0, 1.0, cfg)
    best_mask = position_to_mask(run.best_position, cfg.threshold)
    return FeatureMask(selected=best_mask, fitness=-run.best_value)


def wrapper_fitness(X: np.ndarray | FeatureMatrix, y: LabelVector | np.ndarray,
                    learner_kind: str = "knn", folds: int = 3, seed: int = 0,
                    hyperparams: dict | None = None
                    ) -> Callable[[np.ndarray], float]:
    """Build a mask -> mean cross-validated accuracy objective.

    The fold plan is drawn once up front so every mask is scored on the
    same partitions; results are memoized by mask bytes since BFO revisits
    masks constantly.
    """
    from ..learn import LearnerSpec, fit, predict

    if folds < 2:
        raise ValidationError(f"folds must be >= 2, got {folds}")
    X = as_array(X)
    labels = y if isinstance(y, LabelVector) else LabelVector(
        np.asarray(y), tuple(str(c) for c in np.unique(np.asarray(y))))
    plan = stratified_kfold(labels, folds, seed)
    spec = LearnerSpec(kind=learner_kind, hyperparams=hyperparams or {}, seed=seed)
    cache: dict[bytes, float] = {}

    def fitness(mask: np.ndarray) -> float:
        mask = np.asarray(mask, dtype=bool)
        key = mask.tobytes()
        if key in cache:
            return cache[key]
        cols = X[:, mask]
        accuracies = []
        for fold in range(plan.k):
            train = plan.train_mask(fold)
            test = plan.test_mask(fold)
            model = fit(spec, cols[train], LabelVector(labels.codes[train],
                                                       labels.class_names))
            pred = predict(model, cols[test])
            accuracies.append(float(np.mean(pred == labels.codes[test])))
        value = float(np.mean(accuracies))
        cache[key] = value
        return value

    return fitness
