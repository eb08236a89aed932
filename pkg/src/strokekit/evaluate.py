"""Metric suite, ROC/AUC, k-fold cross-validation, learning curves, benchmarks.

Accuracy, precision, recall, and F1 follow the confusion-matrix definitions
(accuracy = trace/total; per-class precision TP/(TP+FP) and recall
TP/(TP+FN); F1 the harmonic mean of the reported precision and recall).
Classes with a zero denominator contribute 0 and are flagged rather than
producing NaN. Metrics live in [0, 1] internally; report emission formats
them as percentages.
"""

from __future__ import annotations

import time
import tracemalloc
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .chain import Chain, fit_chain
from .config import PipelineConfig
from .data import (
    FoldPlan,
    LabelVector,
    as_array,
    is_augmented,
    parent_id,
    stratified_kfold,
)
from .errors import (
    AbsentClass,
    EmptyMatrix,
    FractionTooSmall,
    LengthMismatch,
    NonFiniteFeature,
    ValidationError,
)


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # c x c, rows = true class, columns = predicted

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValidationError("confusion matrix must be square")
        c.flags.writeable = False
        object.__setattr__(self, "counts", c)

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def tp(self, i: int) -> int:
        return int(self.counts[i, i])

    def fp(self, i: int) -> int:
        return int(self.counts[:, i].sum() - self.counts[i, i])

    def fn(self, i: int) -> int:
        return int(self.counts[i, :].sum() - self.counts[i, i])

    def tn(self, i: int) -> int:
        return self.total - self.tp(i) - self.fp(i) - self.fn(i)


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    averaging: str
    per_class_precision: tuple
    per_class_recall: tuple
    per_class_f1: tuple
    support: tuple
    zero_division_classes: tuple = ()

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "averaging": self.averaging,
            "per_class_precision": list(self.per_class_precision),
            "per_class_recall": list(self.per_class_recall),
            "per_class_f1": list(self.per_class_f1),
            "support": list(self.support),
            "zero_division_classes": list(self.zero_division_classes),
        }

    def as_percent(self) -> dict:
        return {k: 100.0 * getattr(self, k)
                for k in ("accuracy", "precision", "recall", "f1")}


@dataclass(frozen=True)
class RocCurve:
    class_id: int
    points: tuple          # ((fpr, tpr), ...) from (0,0) to (1,1)
    auc: float

    def to_dict(self) -> dict:
        return {"class_id": self.class_id,
                "points": [[float(a), float(b)] for a, b in self.points],
                "auc": self.auc}


@dataclass(frozen=True)
class CvResult:
    per_fold: tuple        # k MetricsReports
    mean: MetricsReport
    seed: int
    k: int

    def to_dict(self) -> dict:
        return {"k": self.k, "seed": self.seed,
                "per_fold": [r.to_dict() for r in self.per_fold],
                "mean": self.mean.to_dict()}


@dataclass(frozen=True)
class BenchReport:
    time_mean: float          # seconds per fit+predict cycle
    time_std: float           # population std over repetitions
    peak_memory: int          # bytes
    incremental_memory: int   # bytes
    repetitions: int
    mechanism: str = "tracemalloc (separate untimed cycle)"

    def format_row(self) -> str:
        return (f"{self.time_mean * 1e3:.0f}ms ± {self.time_std * 1e3:.1f}ms, "
                f"PM: {self.peak_memory / 2**20:.2f} MiB, "
                f"INC: {self.incremental_memory / 2**20:.2f} MiB")

    def to_dict(self) -> dict:
        return {"time_mean_s": self.time_mean, "time_std_s": self.time_std,
                "peak_memory_bytes": self.peak_memory,
                "incremental_memory_bytes": self.incremental_memory,
                "repetitions": self.repetitions, "mechanism": self.mechanism,
                "formatted": self.format_row()}


@dataclass(frozen=True)
class FoldOutcome:
    """Everything observable about one evaluation fold."""

    fold: int
    chain: Chain
    test_indices: np.ndarray
    y_true: np.ndarray
    y_pred: np.ndarray
    scores: np.ndarray
    report: MetricsReport


# ---------------------------------------------------------------------------
# Confusion matrix and derived metrics
# ---------------------------------------------------------------------------

def confusion(y_true, y_pred, n_classes: int | None = None) -> ConfusionMatrix:
    yt = np.asarray(y_true, dtype=np.int64)
    yp = np.asarray(y_pred, dtype=np.int64)
    if yt.size != yp.size:
        raise LengthMismatch(yt.size, yp.size)
    if yt.size < 1:
        raise ValidationError("need at least one sample")
    observed = int(max(yt.max(), yp.max()))
    c = n_classes if n_classes is not None else observed + 1
    if observed >= c or min(yt.min(), yp.min()) < 0:
        raise ValidationError(
            f"label code {observed} outside the declared {c} classes")
    counts = np.zeros((c, c), dtype=np.int64)
    np.add.at(counts, (yt, yp), 1)
    return ConfusionMatrix(counts)


def metrics(cm: ConfusionMatrix, averaging: str = "macro") -> MetricsReport:
    if averaging not in ("macro", "weighted"):
        raise ValidationError("averaging must be macro or weighted")
    total = cm.total
    if total < 1:
        raise EmptyMatrix()
    c = cm.n_classes
    accuracy = float(np.trace(cm.counts)) / total

    prec = np.zeros(c)
    rec = np.zeros(c)
    f1c = np.zeros(c)
    support = cm.counts.sum(axis=1)
    flagged = []
    for i in range(c):
        tp, fp, fn = cm.tp(i), cm.fp(i), cm.fn(i)
        if tp + fp > 0:
            prec[i] = tp / (tp + fp)
        else:
            flagged.append(i)
        if tp + fn > 0:
            rec[i] = tp / (tp + fn)
        elif i not in flagged:
            flagged.append(i)
        if prec[i] + rec[i] > 0:
            f1c[i] = 2.0 * prec[i] * rec[i] / (prec[i] + rec[i])

    if averaging == "macro":
        p, r = float(prec.mean()), float(rec.mean())
    else:
        w = support / total
        p, r = float(w @ prec), float(w @ rec)
    f1 = 2.0 * p * r / (p + r) if p + r > 0 else 0.0

    return MetricsReport(
        accuracy=accuracy, precision=p, recall=r, f1=f1, averaging=averaging,
        per_class_precision=tuple(prec), per_class_recall=tuple(rec),
        per_class_f1=tuple(f1c), support=tuple(int(s) for s in support),
        zero_division_classes=tuple(flagged),
    )


def micro_recall(cm: ConfusionMatrix) -> float:
    """Micro-averaged recall; equals accuracy exactly in multiclass."""
    tp = sum(cm.tp(i) for i in range(cm.n_classes))
    denom = sum(cm.tp(i) + cm.fn(i) for i in range(cm.n_classes))
    return tp / denom


# ---------------------------------------------------------------------------
# ROC / AUC
# ---------------------------------------------------------------------------

def roc(scores: np.ndarray, y_true, class_id: int) -> RocCurve:
    """One-vs-rest ROC sweep over all distinct thresholds of one class's score."""
    scores = np.asarray(scores, dtype=np.float64)
    yt = np.asarray(y_true, dtype=np.int64)
    if scores.ndim != 2 or scores.shape[0] != yt.size:
        raise ValidationError("scores must be (n_samples, n_classes)")
    if not np.all(np.isfinite(scores)):
        raise NonFiniteFeature("scores")
    if not 0 <= class_id < scores.shape[1]:
        raise AbsentClass(class_id, "score column for the")
    positive = yt == class_id
    n_pos = int(positive.sum())
    n_neg = int(yt.size - n_pos)
    if n_pos == 0:
        raise AbsentClass(class_id, "positive")
    if n_neg == 0:
        raise AbsentClass(class_id, "negative")

    s = scores[:, class_id]
    thresholds = np.unique(s)[::-1]  # descending; ties collapse to one step
    points = [(0.0, 0.0)]
    for t in thresholds:
        flag = s >= t
        tp = int(np.sum(flag & positive))
        fp = int(np.sum(flag & ~positive))
        points.append((fp / n_neg, tp / n_pos))

    pts = np.asarray(points)
    auc = float(np.trapezoid(pts[:, 1], pts[:, 0]))
    return RocCurve(class_id=int(class_id), points=tuple(map(tuple, points)),
                    auc=auc)


def roc_per_class(scores: np.ndarray, y_true, n_classes: int) -> list[RocCurve]:
    curves = []
    for cls in range(n_classes):
        try:
            curves.append(roc(scores, y_true, cls))
        except AbsentClass:
            continue
    return curves


# ---------------------------------------------------------------------------
# Cross-validation
# ---------------------------------------------------------------------------

def _mean_report(reports: list[MetricsReport]) -> MetricsReport:
    def avg(attr):
        return float(np.mean([getattr(r, attr) for r in reports]))

    def avg_tuple(attr):
        return tuple(np.mean([getattr(r, attr) for r in reports], axis=0))

    flagged = sorted({c for r in reports for c in r.zero_division_classes})
    return MetricsReport(
        accuracy=avg("accuracy"), precision=avg("precision"),
        recall=avg("recall"), f1=avg("f1"),
        averaging=reports[0].averaging,
        per_class_precision=avg_tuple("per_class_precision"),
        per_class_recall=avg_tuple("per_class_recall"),
        per_class_f1=avg_tuple("per_class_f1"),
        support=tuple(int(s) for s in np.sum([r.support for r in reports], axis=0)),
        zero_division_classes=tuple(flagged),
    )


def _fold_membership(labels: LabelVector, sample_ids, k: int, seed: int
                     ) -> tuple[FoldPlan, np.ndarray, np.ndarray]:
    """Fold plan over base samples; augmented rows inherit their parent's fold.

    Returns (plan over base rows, per-sample fold id with -1 for train-only
    augmented rows, base-row mask). Augmented rows never enter a test fold;
    they join the training side whenever their parent is not held out.
    """
    n = len(labels)
    if sample_ids is None:
        base_mask = np.ones(n, dtype=bool)
    else:
        base_mask = np.array([not is_augmented(s) for s in sample_ids])
    base_labels = LabelVector(labels.codes[base_mask], labels.class_names)
    plan = stratified_kfold(base_labels, k, seed)

    fold_of = np.full(n, -1, dtype=np.int32)
    fold_of[base_mask] = plan.fold_index
    if sample_ids is not None:
        base_fold = {sample_ids[i]: fold_of[i]
                     for i in np.flatnonzero(base_mask)}
        for i in np.flatnonzero(~base_mask):
            fold_of[i] = base_fold.get(parent_id(sample_ids[i]), -1)
    return plan, fold_of, base_mask


def cross_validate(config: PipelineConfig, X, y: LabelVector, k: int,
                   seed: int, sample_ids=None,
                   fold_observer: Callable[[FoldOutcome], None] | None = None
                   ) -> CvResult:
    """Leakage-free k-fold CV: scaler, transform, and classifier fit per fold
    on the k-1 training folds only; augmented rows never land in a test fold.
    """
    X = as_array(X)
    _, fold_of, base_mask = _fold_membership(y, sample_ids, k, seed)

    reports = []
    for fold in range(k):
        test = base_mask & (fold_of == fold)
        train = fold_of != fold  # includes augmented rows of training parents
        chain = fit_chain(config, X[train],
                          LabelVector(y.codes[train], y.class_names))
        scores = chain.predict_scores(X[test])
        y_pred = chain.classifier.classes[np.argmax(scores, axis=1)]
        cm = confusion(y.codes[test], y_pred, n_classes=y.n_classes)
        report = metrics(cm, config.averaging)
        reports.append(report)
        if fold_observer is not None:
            fold_observer(FoldOutcome(
                fold=fold, chain=chain, test_indices=np.flatnonzero(test),
                y_true=y.codes[test], y_pred=y_pred,
                scores=_expand_scores(scores, chain.classifier.classes, y.n_classes),
                report=report))

    return CvResult(per_fold=tuple(reports), mean=_mean_report(reports),
                    seed=seed, k=k)


def _expand_scores(scores: np.ndarray, classes: np.ndarray, n_classes: int
                   ) -> np.ndarray:
    """Widen a score matrix over trained classes to the declared class set."""
    if scores.shape[1] == n_classes and np.array_equal(classes, np.arange(n_classes)):
        return scores
    out = np.zeros((scores.shape[0], n_classes))
    out[:, classes] = scores
    return out


# ---------------------------------------------------------------------------
# Learning curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurveRow:
    fraction: float
    n_samples: int
    means: dict
    stds: dict

    def to_dict(self) -> dict:
        return {"fraction": self.fraction, "n_samples": self.n_samples,
                "means": dict(self.means), "stds": dict(self.stds)}


_CURVE_METRICS = ("accuracy", "precision", "recall", "f1")


def learning_curve(config: PipelineConfig, X, y: LabelVector,
                   train_fractions, k: int, seed: int) -> list[CurveRow]:
    """k-fold CV per stratified subsample size; rows ordered by fraction.

    Selected indices are sorted, so fraction 1.0 degenerates to the plain
    cross_validate call with the same seed.
    """
    X = as_array(X)
    fractions = sorted(float(f) for f in train_fractions)
    if any(not 0.0 < f <= 1.0 for f in fractions):
        raise ValidationError("fractions must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    rows = []
    for frac in fractions:
        keep = []
        for code in range(y.n_classes):
            idx = np.flatnonzero(y.codes == code)
            if idx.size == 0:
                continue
            count = int(frac * idx.size + 1e-9)
            if count == 0:
                raise FractionTooSmall(frac, y.class_names[code])
            keep.append(rng.choice(idx, size=count, replace=False))
        sel = np.sort(np.concatenate(keep))
        sub_y = LabelVector(y.codes[sel], y.class_names)
        result = cross_validate(config, X[sel], sub_y, k, seed)
        means = {m: float(np.mean([getattr(r, m) for r in result.per_fold]))
                 for m in _CURVE_METRICS}
        stds = {m: float(np.std([getattr(r, m) for r in result.per_fold]))
                for m in _CURVE_METRICS}
        rows.append(CurveRow(fraction=frac, n_samples=int(sel.size),
                             means=means, stds=stds))
    return rows


# ---------------------------------------------------------------------------
# Runtime / memory benchmark
# ---------------------------------------------------------------------------

def benchmark(config: PipelineConfig, X, y: LabelVector,
              repetitions: int = 5) -> BenchReport:
    """Wall-clock mean/std for one fit+predict cycle plus traced memory.

    Timing runs untraced; a separate cycle under tracemalloc supplies peak
    and incremental allocation figures (absolute numbers are hardware- and
    allocator-bound, so only the report format is contractual).
    """
    if repetitions < 3:
        raise ValidationError(f"repetitions must be >= 3, got {repetitions}")
    X = as_array(X)

    def cycle():
        chain = fit_chain(config, X, y)
        chain.predict(X)

    times = []
    for _ in range(repetitions):
        start = time.perf_counter()
        cycle()
        times.append(time.perf_counter() - start)

    tracemalloc.start()
    before, _ = tracemalloc.get_traced_memory()
    cycle()
    after, peak = tracemalloc.get_traced_memory()
    tracemalloc.stop()

    return BenchReport(
        time_mean=float(np.mean(times)),
        time_std=float(np.std(times)),  # population formula
        peak_memory=int(peak),
        incremental_memory=int(max(0, after - before)),
        repetitions=repetitions,
    )
