"""Feature CSV loading, validation, and deterministic splitting.

The on-disk contract is one header row ``id,label,split,f0,f1,...,f{d-1}``
followed by one row per sample. ``split`` is ``train``/``test``/``val`` or
empty. Everything loaded here is immutable; splits and fold plans are pure
functions of (labels, parameters, seed).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import (
    ClassSmallerThanK,
    ClassTooSmall,
    MissingColumn,
    NonFiniteFeature,
    NonNumericValue,
    RaggedRow,
    UnknownLabel,
    ValidationError,
)

# Canonical three-class encoding used throughout reports.
CANONICAL_LABELS = ("Normal", "Ischemic", "Hemorrhagic")

SPLIT_TRAIN, SPLIT_TEST, SPLIT_VAL = 0, 1, 2
SPLIT_NAMES = ("train", "test", "val")

# Augmented rows carry an id suffix "#aug<k>"; they are excluded from
# evaluation folds and follow their parent image into training.
AUG_MARKER = "#aug"


def is_augmented(sample_id: str) -> bool:
    return AUG_MARKER in sample_id


def parent_id(sample_id: str) -> str:
    return sample_id.split(AUG_MARKER, 1)[0]


def _freeze(arr: np.ndarray) -> np.ndarray:
    # own a copy so freezing never mutates a caller-held array's flags
    arr = np.array(arr, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class FeatureMatrix:
    """Dense row-major matrix of per-sample features."""

    values: np.ndarray
    sample_ids: tuple[str, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValidationError(f"feature matrix must be 2-D, got {v.ndim}-D")
        if v.shape[0] < 1 or v.shape[1] < 1:
            raise ValidationError("feature matrix needs >=1 sample and >=1 feature")
        if not np.all(np.isfinite(v)):
            raise NonFiniteFeature("feature matrix")
        if len(self.sample_ids) != v.shape[0]:
            raise ValidationError("sample_ids length does not match n_samples")
        object.__setattr__(self, "values", _freeze(v))
        object.__setattr__(self, "sample_ids", tuple(self.sample_ids))

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LabelVector:
    """Integer-coded labels plus the declared name for each code."""

    codes: np.ndarray
    class_names: tuple[str, ...]

    def __post_init__(self):
        c = np.asarray(self.codes, dtype=np.int64)
        if c.ndim != 1:
            raise ValidationError("labels must be 1-D")
        if c.size and (c.min() < 0 or c.max() >= len(self.class_names)):
            raise ValidationError("label code outside declared class set")
        object.__setattr__(self, "codes", _freeze(c))
        object.__setattr__(self, "class_names", tuple(self.class_names))

    def __len__(self) -> int:
        return self.codes.size

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def counts(self) -> np.ndarray:
        return np.bincount(self.codes, minlength=self.n_classes)


@dataclass(frozen=True)
class SplitAssignment:
    """Per-sample split tag; every sample belongs to exactly one split."""

    split: np.ndarray  # values in {SPLIT_TRAIN, SPLIT_TEST, SPLIT_VAL}

    def __post_init__(self):
        s = np.asarray(self.split, dtype=np.int8)
        if s.ndim != 1:
            raise ValidationError("split assignment must be 1-D")
        if s.size and (s.min() < 0 or s.max() > 2):
            raise ValidationError("split tag outside {train,test,val}")
        object.__setattr__(self, "split", _freeze(s))

    def mask(self, which: int) -> np.ndarray:
        return self.split == which

    def counts(self) -> tuple[int, int, int]:
        return tuple(int(np.sum(self.split == s)) for s in (0, 1, 2))


@dataclass(frozen=True)
class FoldPlan:
    """Stratified k-fold assignment: fold id in 0..k-1 per sample."""

    k: int
    fold_index: np.ndarray
    seed: int

    def __post_init__(self):
        f = np.asarray(self.fold_index, dtype=np.int32)
        object.__setattr__(self, "fold_index", _freeze(f))

    def test_mask(self, fold: int) -> np.ndarray:
        return self.fold_index == fold

    def train_mask(self, fold: int) -> np.ndarray:
        return self.fold_index != fold


@dataclass(frozen=True)
class Scaler:
    """Per-column z-score statistics fitted on training rows only."""

    mean: np.ndarray
    scale: np.ndarray  # population standard deviation; 1.0 where variance is 0

    def __post_init__(self):
        object.__setattr__(self, "mean", _freeze(np.asarray(self.mean, dtype=np.float64)))
        object.__setattr__(self, "scale", _freeze(np.asarray(self.scale, dtype=np.float64)))

    def to_payload(self) -> dict:
        from .serialize import encode_array
        return {"mean": encode_array(self.mean), "scale": encode_array(self.scale)}

    @staticmethod
    def from_payload(payload: dict) -> "Scaler":
        from .serialize import decode_array
        return Scaler(decode_array(payload["mean"]), decode_array(payload["scale"]))


# ---------------------------------------------------------------------------
# CSV loading / saving
# ---------------------------------------------------------------------------

def _decode_labels(tokens: list[str], declared: tuple[str, ...] | None,
                   rows: list[int]) -> LabelVector:
    """Map raw label tokens to integer codes.

    With a declared label set, any token outside it is an error. Otherwise
    the canonical stroke classes are used when every token belongs to them;
    failing that, the distinct tokens (sorted) become the declared set.
    """
    if declared is not None:
        index = {name: i for i, name in enumerate(declared)}
        names = tuple(declared)
    elif all(t in CANONICAL_LABELS for t in tokens):
        index = {name: i for i, name in enumerate(CANONICAL_LABELS)}
        names = CANONICAL_LABELS
    else:
        names = tuple(sorted(set(tokens)))
        index = {name: i for i, name in enumerate(names)}
    codes = np.empty(len(tokens), dtype=np.int64)
    for i, t in enumerate(tokens):
        if t not in index:
            raise UnknownLabel(rows[i], "label", t, index)
        codes[i] = index[t]
    return LabelVector(codes, names)


def load_features(path, label_names: tuple[str, ...] | None = None
                  ) -> tuple[FeatureMatrix, LabelVector, SplitAssignment | None]:
    """Load a feature CSV into (FeatureMatrix, LabelVector, splits?).

    ``label_names`` optionally declares the allowed label set; otherwise it
    is inferred (canonical stroke classes first, sorted tokens as fallback).
    Row numbers in errors are 1-based counting the header as row 1.
    """
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except FileNotFoundError:
        raise ValidationError(f"features file not found: {path}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        for required in ("id", "label", "split"):
            if required not in header[:3]:
                raise MissingColumn(required, str(path))
        if header[:3] != ["id", "label", "split"]:
            raise ValidationError(
                f"{path}: leading columns must be id,label,split, got {header[:3]}")
        feat_cols = header[3:]
        if not feat_cols:
            raise MissingColumn("f0", str(path))
        expected = [f"f{i}" for i in range(len(feat_cols))]
        if feat_cols != expected:
            missing = next(e for c, e in zip(feat_cols, expected) if c != e)
            raise MissingColumn(missing, str(path))
        d = len(feat_cols)

        ids: list[str] = []
        label_tokens: list[str] = []
        split_tokens: list[str] = []
        rows: list[int] = []
        values: list[np.ndarray] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3 + d:
                raise RaggedRow(lineno, 3 + d, len(row))
            ids.append(row[0])
            label_tokens.append(row[1].strip())
            split_tokens.append(row[2].strip().lower())
            rows.append(lineno)
            try:
                vec = np.array([float(tok) for tok in row[3:]], dtype=np.float64)
            except ValueError:
                col = next(i for i, tok in enumerate(row[3:])
                           if not _is_float(tok))
                raise NonNumericValue(lineno, f"f{col}", row[3 + col]) from None
            if not np.all(np.isfinite(vec)):
                col = int(np.flatnonzero(~np.isfinite(vec))[0])
                raise NonNumericValue(lineno, f"f{col}", row[3 + col])
            values.append(vec)

    if not values:
        raise ValidationError(f"{path}: no data rows")
    matrix = FeatureMatrix(np.vstack(values), tuple(ids))
    labels = _decode_labels(label_tokens, label_names, rows)

    if all(t == "" for t in split_tokens):
        split = None
    else:
        split_index = {name: i for i, name in enumerate(SPLIT_NAMES)}
        tags = np.empty(len(split_tokens), dtype=np.int8)
        for i, t in enumerate(split_tokens):
            if t not in split_index:
                raise UnknownLabel(rows[i], "split", t, split_index)
            tags[i] = split_index[t]
        split = SplitAssignment(tags)
    return matrix, labels, split


def _is_float(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def save_features(path, matrix: FeatureMatrix, labels: LabelVector,
                  split: SplitAssignment | None = None) -> None:
    """Write a feature CSV; floats use repr so a reload is lossless."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "label", "split"]
                        + [f"f{i}" for i in range(matrix.n_features)])
        for i in range(matrix.n_samples):
            tag = SPLIT_NAMES[split.split[i]] if split is not None else ""
            writer.writerow(
                [matrix.sample_ids[i], labels.class_names[labels.codes[i]], tag]
                + [repr(float(v)) for v in matrix.values[i]])


# ---------------------------------------------------------------------------
# Deterministic stratified splitting
# ---------------------------------------------------------------------------

def _allocate(total: int, weights: np.ndarray) -> np.ndarray:
    """Largest-remainder allocation of `total` items proportional to weights."""
    exact = weights * total
    counts = np.floor(exact).astype(int)
    remainder = total - counts.sum()
    if remainder > 0:
        order = np.argsort(-(exact - counts), kind="stable")
        counts[order[:remainder]] += 1
    return counts


def stratified_split(labels: LabelVector, fractions: tuple[float, float, float],
                     seed: int) -> SplitAssignment:
    """Assign train/test/val per sample, stratified by class.

    Per-class counts per split land within +/-1 of fraction * class size;
    the assignment is a deterministic function of (labels, fractions, seed).
    """
    fractions = tuple(float(f) for f in fractions)
    if any(f <= 0 for f in fractions):
        raise ValidationError("split fractions must be positive")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValidationError(f"split fractions sum to {sum(fractions)}, not 1")
    counts = labels.counts()
    for code, n_c in enumerate(counts):
        if 0 < n_c < 3:
            raise ClassTooSmall(labels.class_names[code], int(n_c), 3)

    rng = np.random.default_rng(seed)
    tags = np.empty(len(labels), dtype=np.int8)
    weights = np.asarray(fractions)
    for code in range(labels.n_classes):
        idx = np.flatnonzero(labels.codes == code)
        if idx.size == 0:
            continue
        alloc = _allocate(idx.size, weights)
        perm = rng.permutation(idx)
        start = 0
        for which, n in enumerate(alloc):
            tags[perm[start:start + n]] = which
            start += n
    return SplitAssignment(tags)


def stratified_kfold(labels: LabelVector, k: int, seed: int) -> FoldPlan:
    """Stratified k-fold plan: per-class and total fold sizes differ by <=1.

    Each class's shuffled samples are dealt to folds ordered by current
    load (ties by fold index), which keeps total fold sizes balanced no
    matter how the per-class remainders fall.
    """
    if k < 2:
        raise ValidationError(f"k must be >= 2, got {k}")
    counts = labels.counts()
    for code, n_c in enumerate(counts):
        if 0 < n_c < k:
            raise ClassSmallerThanK(labels.class_names[code], int(n_c), k)

    rng = np.random.default_rng(seed)
    fold_index = np.empty(len(labels), dtype=np.int32)
    load = np.zeros(k, dtype=np.int64)
    for code in range(labels.n_classes):
        idx = np.flatnonzero(labels.codes == code)
        if idx.size == 0:
            continue
        perm = rng.permutation(idx)
        base, extra = divmod(idx.size, k)
        order = np.lexsort((np.arange(k), load))
        sizes = np.full(k, base, dtype=np.int64)
        sizes[order[:extra]] += 1
        start = 0
        for fold in range(k):
            n = sizes[fold]
            fold_index[perm[start:start + n]] = fold
            start += n
        load += sizes
    return FoldPlan(k=k, fold_index=fold_index, seed=seed)


# ---------------------------------------------------------------------------
# Standardization
# ---------------------------------------------------------------------------

def standardize_fit(X_train: np.ndarray | FeatureMatrix) -> Scaler:
    """Fit per-column mean and population standard deviation."""
    X = as_array(X_train)
    if X.shape[0] < 2:
        raise ValidationError("standardize_fit needs at least 2 training rows")
    mean = X.mean(axis=0)
    sd = X.std(axis=0)  # population convention (divide by n)
    scale = np.where(sd > 0.0, sd, 1.0)
    return Scaler(mean=mean, scale=scale)


def standardize_apply(scaler: Scaler, X: np.ndarray | FeatureMatrix) -> np.ndarray:
    X = as_array(X)
    if X.shape[1] != scaler.mean.shape[0]:
        from .errors import DimensionMismatch
        raise DimensionMismatch(scaler.mean.shape[0], X.shape[1])
    return (X - scaler.mean) / scaler.scale


def as_array(X: np.ndarray | FeatureMatrix) -> np.ndarray:
    if isinstance(X, FeatureMatrix):
        return X.values
    return np.asarray(X, dtype=np.float64)
