"""Exception hierarchy shared across the toolkit.

``StrokekitError`` is the common base; ``ValidationError`` marks problems a
user can fix in their inputs (bad CSV, bad config) and maps to CLI exit
code 1, while everything else surfaces as a runtime failure (exit code 2).
"""

from __future__ import annotations


class StrokekitError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(StrokekitError):
    """Input data or configuration failed validation."""


# -- feature CSV loading -----------------------------------------------------

class MissingColumn(ValidationError):
    def __init__(self, column: str, path: str = ""):
        self.column = column
        super().__init__(f"missing required column {column!r}"
                         + (f" in {path}" if path else ""))


class RaggedRow(ValidationError):
    def __init__(self, row: int, expected: int, got: int):
        self.row = row
        super().__init__(
            f"row {row} has {got} fields, expected {expected}")


class NonNumericValue(ValidationError):
    def __init__(self, row: int, column: str, token: str):
        self.row = row
        self.column = column
        super().__init__(
            f"row {row}, column {column!r}: non-numeric value {token!r}")


class UnknownLabel(ValidationError):
    def __init__(self, row: int, column: str, token: str, allowed):
        self.row = row
        self.column = column
        super().__init__(
            f"row {row}, column {column!r}: unknown label {token!r}"
            f" (allowed: {sorted(allowed)})")


# -- splitting ---------------------------------------------------------------

class ClassTooSmall(ValidationError):
    def __init__(self, label, count: int, needed: int):
        super().__init__(
            f"class {label!r} has only {count} samples, needs >= {needed}")


class ClassSmallerThanK(ValidationError):
    def __init__(self, label, count: int, k: int):
        super().__init__(
            f"class {label!r} has {count} samples, fewer than k={k} folds")


class FractionTooSmall(ValidationError):
    def __init__(self, fraction: float, label):
        super().__init__(
            f"fraction {fraction} leaves class {label!r} with no samples")


# -- linear algebra / models -------------------------------------------------

class DimensionMismatch(ValidationError):
    def __init__(self, expected: int, got: int, what: str = "columns"):
        super().__init__(f"expected {expected} {what}, got {got}")


class SingularScatter(StrokekitError):
    def __init__(self):
        super().__init__(
            "within-class scatter is numerically singular at shrinkage=0; "
            "raise the shrinkage parameter to regularize it")


class NonFiniteFeature(ValidationError):
    def __init__(self, where: str = "input"):
        super().__init__(f"{where} contains NaN or Inf values")


class HyperparamOutOfRange(ValidationError):
    def __init__(self, name: str, value, constraint: str):
        super().__init__(
            f"hyperparameter {name}={value!r} out of range ({constraint})")


class UnknownHyperparam(ValidationError):
    def __init__(self, kind: str, name: str, allowed):
        super().__init__(
            f"unknown hyperparameter {name!r} for {kind}"
            f" (allowed: {sorted(allowed)})")


# -- evaluation --------------------------------------------------------------

class LengthMismatch(ValidationError):
    def __init__(self, n_true: int, n_pred: int):
        super().__init__(
            f"y_true has {n_true} entries, y_pred has {n_pred}")


class EmptyMatrix(ValidationError):
    def __init__(self):
        super().__init__("confusion matrix has zero total count")


class AbsentClass(ValidationError):
    def __init__(self, class_id, role: str = "positive"):
        super().__init__(
            f"class {class_id!r} has no {role} samples in y_true")


# -- persistence -------------------------------------------------------------

class VersionMismatch(StrokekitError):
    def __init__(self, found: int, supported: int):
        self.found = found
        self.supported = supported
        super().__init__(
            f"bundle schema version {found} not supported "
            f"(this build reads version {supported})")


class CorruptPayload(StrokekitError):
    def __init__(self, detail: str = "checksum mismatch"):
        super().__init__(f"bundle payload is corrupt: {detail}")


class UnwritablePath(StrokekitError):
    def __init__(self, path: str, cause: str):
        super().__init__(f"cannot write {path}: {cause}")
