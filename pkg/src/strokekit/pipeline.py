"""Experiment orchestration: single runs, grids, bundles, and report emission.

A run loads one feature CSV, fits scaler -> optimizer -> classifier without
leakage, evaluates per the configured protocol (10-fold CV by default, or
the CSV's own train/test/val split), and snapshots everything needed to
reproduce the numbers into a RunRecord. Grid runs expand the cartesian
product of feature files x optimizers x classifiers and never let one
failing cell abort its siblings.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .chain import Chain, fit_chain
from .config import EvaluationSpec, OptimizerSpec, PipelineConfig
from .data import (
    SPLIT_TEST,
    SPLIT_TRAIN,
    LabelVector,
    SplitAssignment,
    is_augmented,
    load_features,
    parent_id,
    stratified_split,
)
from .errors import StrokekitError, UnwritablePath, ValidationError
from .evaluate import (
    BenchReport,
    ConfusionMatrix,
    CvResult,
    MetricsReport,
    benchmark,
    confusion,
    cross_validate,
    metrics,
    roc_per_class,
)
from .learn import LearnerSpec
from .serialize import dump_envelope, load_envelope, payload_checksum, wrap

BUNDLE_FORMAT = "strokekit-bundle"


@dataclass
class RunRecord:
    config: dict
    class_names: tuple
    cv: CvResult | None = None
    holdout: MetricsReport | None = None
    confusion_matrix: ConfusionMatrix | None = None
    roc_curves: list = field(default_factory=list)
    bench: BenchReport | None = None
    artifact_hashes: dict = field(default_factory=dict)
    timestamp: str = ""
    error: str | None = None

    @property
    def mean_report(self) -> MetricsReport | None:
        if self.cv is not None:
            return self.cv.mean
        return self.holdout

    def to_dict(self, include_timestamp: bool = True) -> dict:
        out = {
            "config": self.config,
            "class_names": list(self.class_names),
            "cv": None if self.cv is None else self.cv.to_dict(),
            "holdout": None if self.holdout is None else self.holdout.to_dict(),
            "confusion": (None if self.confusion_matrix is None
                          else self.confusion_matrix.counts.tolist()),
            "roc": [c.to_dict() for c in self.roc_curves],
            "bench": None if self.bench is None else self.bench.to_dict(),
            "artifact_hashes": dict(self.artifact_hashes),
            "error": self.error,
        }
        if include_timestamp:
            out["timestamp"] = self.timestamp
        return out

    def to_json(self, include_timestamp: bool = True) -> str:
        return json.dumps(self.to_dict(include_timestamp), sort_keys=True, indent=2)


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _holdout_membership(labels: LabelVector, sample_ids, split: SplitAssignment | None,
                        config: PipelineConfig) -> tuple[np.ndarray, np.ndarray]:
    """(train mask, test mask) honoring the CSV split column when present.

    Augmented rows never evaluate: they train when their parent trains and
    are dropped otherwise.
    """
    n = len(labels)
    aug = np.array([is_augmented(s) for s in sample_ids])
    base = ~aug
    if split is None:
        base_labels = LabelVector(labels.codes[base], labels.class_names)
        computed = stratified_split(base_labels, config.evaluation.fractions,
                                    config.seed)
        tags = np.full(n, -1, dtype=np.int8)
        tags[base] = computed.split
    else:
        tags = split.split.astype(np.int8).copy()
        tags[aug] = -1
    by_id = {sample_ids[i]: tags[i] for i in np.flatnonzero(base)}
    train = tags == SPLIT_TRAIN
    for i in np.flatnonzero(aug):
        if by_id.get(parent_id(sample_ids[i]), -1) == SPLIT_TRAIN:
            train[i] = True
    test = base & (tags == SPLIT_TEST)
    if not test.any():
        raise ValidationError("holdout evaluation found no test rows")
    if not train.any():
        raise ValidationError("holdout evaluation found no training rows")
    return train, test


def _run_impl(config: PipelineConfig, with_bench: bool = False
              ) -> tuple[RunRecord, Chain]:
    matrix, labels, split = load_features(config.features_path)
    X = matrix.values
    record = RunRecord(
        config=config.to_dict(),
        class_names=labels.class_names,
        artifact_hashes={
            "features_sha256": _file_sha256(config.features_path),
            "config_sha256": payload_checksum(config.to_dict()),
        },
        timestamp=_utc_now(),
    )

    if config.evaluation.mode == "kfold":
        oof = {"true": [], "pred": [], "scores": []}

        def observer(outcome):
            oof["true"].append(outcome.y_true)
            oof["pred"].append(outcome.y_pred)
            oof["scores"].append(outcome.scores)

        record.cv = cross_validate(config, X, labels, config.evaluation.k,
                                   config.seed, sample_ids=matrix.sample_ids,
                                   fold_observer=observer)
        y_true = np.concatenate(oof["true"])
        y_pred = np.concatenate(oof["pred"])
        scores = np.vstack(oof["scores"])
        record.confusion_matrix = confusion(y_true, y_pred, labels.n_classes)
        record.roc_curves = roc_per_class(scores, y_true, labels.n_classes)
        final_train = np.ones(X.shape[0], dtype=bool)
    else:
        train, test = _holdout_membership(labels, matrix.sample_ids, split, config)
        chain = fit_chain(config, X[train],
                          LabelVector(labels.codes[train], labels.class_names))
        scores = chain.predict_scores(X[test])
        y_pred = chain.classifier.classes[np.argmax(scores, axis=1)]
        record.confusion_matrix = confusion(labels.codes[test], y_pred,
                                            labels.n_classes)
        record.holdout = metrics(record.confusion_matrix, config.averaging)
        from .evaluate import _expand_scores
        record.roc_curves = roc_per_class(
            _expand_scores(scores, chain.classifier.classes, labels.n_classes),
            labels.codes[test], labels.n_classes)
        final_train = train

    if with_bench:
        record.bench = benchmark(config, X, labels)

    deploy_chain = fit_chain(
        config, X[final_train],
        LabelVector(labels.codes[final_train], labels.class_names))
    return record, deploy_chain


def run(config: PipelineConfig) -> RunRecord:
    """Execute one configuration end to end and return its record."""
    record, _ = _run_impl(config)
    return record


def run_and_bundle(config: PipelineConfig, bundle_path=None,
                   with_bench: bool = False) -> tuple[RunRecord, Chain]:
    record, chain = _run_impl(config, with_bench=with_bench)
    if bundle_path is not None:
        save_bundle(record, chain, bundle_path)
    return record, chain


# ---------------------------------------------------------------------------
# Experiment grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentGrid:
    features: tuple           # ((path, extractor_tag), ...)
    optimizers: tuple         # OptimizerSpec, ...
    classifiers: tuple        # LearnerSpec, ...
    seed: int
    standardize: bool = True
    evaluation: EvaluationSpec = EvaluationSpec()
    averaging: str = "macro"

    def __len__(self) -> int:
        return len(self.features) * len(self.optimizers) * len(self.classifiers)

    def expand(self) -> list[PipelineConfig]:
        cells = []
        for path, tag in self.features:
            for opt in self.optimizers:
                for clf in self.classifiers:
                    cells.append(PipelineConfig(
                        features_path=path, classifier=clf, seed=self.seed,
                        optimizer=opt, extractor_tag=tag,
                        standardize=self.standardize,
                        evaluation=self.evaluation, averaging=self.averaging))
        return cells

    @staticmethod
    def from_dict(obj: dict) -> "ExperimentGrid":
        if "seed" not in obj:
            raise ValidationError("grid must declare a seed")
        feats = []
        for entry in obj.get("features", []):
            if isinstance(entry, str):
                feats.append((entry, "other"))
            else:
                feats.append((entry["path"],
                              entry.get("extractor", entry.get("extractor_tag", "other"))))
        if not feats:
            raise ValidationError("grid needs at least one features file")
        opts = tuple(OptimizerSpec.from_dict(o) for o in obj.get("optimizers", ["none"]))
        clfs = []
        for entry in obj.get("classifiers", []):
            if isinstance(entry, str):
                entry = {"kind": entry}
            entry = dict(entry)
            kind = entry.pop("kind")
            seed = entry.pop("seed", obj["seed"])
            hp = entry.pop("hyperparams", None)
            clfs.append(LearnerSpec(kind=kind, hyperparams=hp if hp is not None else entry,
                                    seed=int(seed)))
        if not clfs:
            raise ValidationError("grid needs at least one classifier")
        return ExperimentGrid(
            features=tuple(feats), optimizers=opts, classifiers=tuple(clfs),
            seed=int(obj["seed"]), standardize=bool(obj.get("standardize", True)),
            evaluation=EvaluationSpec.from_dict(obj.get("evaluation")),
            averaging=obj.get("averaging", "macro"),
        )


def _cell_sort_key(indexed_record):
    index, record = indexed_record
    report = record.mean_report
    return (-report.accuracy, -report.f1, index)


def run_grid(grid: ExperimentGrid, parallelism: int = 1
             ) -> tuple[list[RunRecord], list[dict]]:
    """One RunRecord per grid cell plus a ranked summary.

    Cells are scheduled up to `parallelism` at a time; output order is the
    grid declaration order regardless of completion order, and a failing
    cell is recorded with its error while its siblings continue. The
    summary ranks successful cells by mean accuracy, ties broken by F1 and
    then declaration order; rank 1 carries the best flag.
    """
    configs = grid.expand()

    def one(config: PipelineConfig) -> RunRecord:
        try:
            return run(config)
        except Exception as exc:  # noqa: BLE001 - cell isolation by contract
            return RunRecord(config=config.to_dict(), class_names=(),
                             timestamp=_utc_now(),
                             error=f"{type(exc).__name__}: {exc}")

    if parallelism <= 1:
        records = [one(c) for c in configs]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=parallelism) as pool:
            records = list(pool.map(one, configs))

    ok = [(i, r) for i, r in enumerate(records) if r.error is None]
    ranked = sorted(ok, key=_cell_sort_key)
    rank_of = {index: pos + 1 for pos, (index, _) in enumerate(ranked)}

    summary = []
    for i, record in enumerate(records):
        cfg = record.config
        row = {
            "grid_index": i,
            "features_path": cfg["features_path"],
            "extractor": cfg["extractor_tag"],
            "optimizer": cfg["optimizer"]["kind"],
            "classifier": cfg["classifier"]["kind"],
            "accuracy": None, "precision": None, "recall": None, "f1": None,
            "rank": None, "best": False, "error": record.error,
        }
        if record.error is None:
            report = record.mean_report
            row.update(accuracy=report.accuracy, precision=report.precision,
                       recall=report.recall, f1=report.f1,
                       rank=rank_of[i], best=rank_of[i] == 1)
        summary.append(row)
    summary.sort(key=lambda r: (r["rank"] is None, r["rank"] if r["rank"] is not None
                                else r["grid_index"]))
    return records, summary


# ---------------------------------------------------------------------------
# Bundles
# ---------------------------------------------------------------------------

def save_bundle(record: RunRecord, chain: Chain, path) -> None:
    payload = {
        "config": record.config,
        "class_names": list(record.class_names),
        "chain": chain.to_payload(),
        "artifact_hashes": dict(record.artifact_hashes),
    }
    try:
        dump_envelope(wrap(payload, BUNDLE_FORMAT), path)
    except OSError as exc:
        raise UnwritablePath(str(path), str(exc)) from exc


def load_bundle(path) -> Chain:
    """Rebuild the runnable predictor chain from a bundle file."""
    payload = load_envelope(path, BUNDLE_FORMAT)
    return Chain.from_payload(payload["chain"])


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------

def _as_dicts(records) -> list[dict]:
    return [r.to_dict() if isinstance(r, RunRecord) else dict(r) for r in records]


def _write_csv(path, header: list[str], rows: list[list]) -> None:
    import csv
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise UnwritablePath(str(path), str(exc)) from exc


def _pct(x) -> str:
    return "" if x is None else f"{100.0 * x:.2f}"


def emit_report(records, out_dir, formats=("csv", "json"),
                summary: list[dict] | None = None) -> list[str]:
    """Write tabular and JSON artifacts for a batch of run records.

    CSV headers are stable and documented in the README; metric columns are
    percentages to match the usual benchmark table format.
    """
    if not records:
        raise ValidationError("no records to report")
    os.makedirs(out_dir, exist_ok=True)
    dicts = _as_dicts(records)
    written = []

    if "json" in formats:
        path = os.path.join(out_dir, "records.json")
        try:
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(dicts, fh, indent=2, sort_keys=True)
                fh.write("\n")
        except OSError as exc:
            raise UnwritablePath(path, str(exc)) from exc
        written.append(path)

    if "csv" in formats:
        def report_of(rec):
            return rec["cv"]["mean"] if rec.get("cv") else rec.get("holdout")

        rows = []
        for i, rec in enumerate(dicts):
            rep = report_of(rec) if rec.get("error") is None else None
            cfg = rec["config"]
            rows.append([
                i, cfg["features_path"], cfg["extractor_tag"],
                cfg["optimizer"]["kind"], cfg["classifier"]["kind"],
                cfg["evaluation"]["mode"], cfg["seed"],
                _pct(rep["accuracy"]) if rep else "",
                _pct(rep["precision"]) if rep else "",
                _pct(rep["recall"]) if rep else "",
                _pct(rep["f1"]) if rep else "",
                rec.get("error") or "",
            ])
        path = os.path.join(out_dir, "summary.csv")
        _write_csv(path, ["record", "features_path", "extractor", "optimizer",
                          "classifier", "evaluation", "seed", "accuracy_pct",
                          "precision_pct", "recall_pct", "f1_pct", "error"], rows)
        written.append(path)

        fold_rows = []
        for i, rec in enumerate(dicts):
            if not rec.get("cv"):
                continue
            for f, rep in enumerate(rec["cv"]["per_fold"]):
                fold_rows.append([i, f + 1, _pct(rep["accuracy"]),
                                  _pct(rep["precision"]), _pct(rep["recall"]),
                                  _pct(rep["f1"])])
            mean = rec["cv"]["mean"]
            fold_rows.append([i, "mean", _pct(mean["accuracy"]),
                              _pct(mean["precision"]), _pct(mean["recall"]),
                              _pct(mean["f1"])])
        if fold_rows:
            path = os.path.join(out_dir, "folds.csv")
            _write_csv(path, ["record", "fold", "accuracy_pct", "precision_pct",
                              "recall_pct", "f1_pct"], fold_rows)
            written.append(path)

        roc_rows = []
        for i, rec in enumerate(dicts):
            for curve in rec.get("roc") or []:
                for fpr, tpr in curve["points"]:
                    roc_rows.append([i, curve["class_id"],
                                     f"{fpr:.10g}", f"{tpr:.10g}",
                                     f"{curve['auc']:.10g}"])
        if roc_rows:
            path = os.path.join(out_dir, "roc_points.csv")
            _write_csv(path, ["record", "class_id", "fpr", "tpr", "auc"], roc_rows)
            written.append(path)

        cm_rows = []
        for i, rec in enumerate(dicts):
            cm = rec.get("confusion")
            if cm is None:
                continue
            names = rec.get("class_names") or [str(j) for j in range(len(cm))]
            for t, row in enumerate(cm):
                for p, count in enumerate(row):
                    cm_rows.append([i, names[t], names[p], count])
        if cm_rows:
            path = os.path.join(out_dir, "confusion.csv")
            _write_csv(path, ["record", "true_class", "predicted_class", "count"],
                       cm_rows)
            written.append(path)

        if summary is not None:
            path = os.path.join(out_dir, "grid_summary.csv")
            _write_csv(
                path,
                ["rank", "grid_index", "features_path", "extractor", "optimizer",
                 "classifier", "accuracy_pct", "precision_pct", "recall_pct",
                 "f1_pct", "best", "error"],
                [[row["rank"] if row["rank"] is not None else "",
                  row["grid_index"], row["features_path"], row["extractor"],
                  row["optimizer"], row["classifier"], _pct(row["accuracy"]),
                  _pct(row["precision"]), _pct(row["recall"]), _pct(row["f1"]),
                  "yes" if row["best"] else "", row["error"] or ""]
                 for row in summary])
            written.append(path)

    if "svg" in formats:
        written.extend(_emit_svg(dicts, out_dir))
    return written


def emit_curve_csv(rows, out_dir) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "learning_curve.csv")
    header = ["fraction", "n_samples"]
    for m in ("accuracy", "precision", "recall", "f1"):
        header += [f"{m}_mean_pct", f"{m}_std_pct"]
    out = []
    for row in rows:
        r = row.to_dict() if hasattr(row, "to_dict") else dict(row)
        line = [f"{r['fraction']:.6g}", r["n_samples"]]
        for m in ("accuracy", "precision", "recall", "f1"):
            line += [_pct(r["means"][m]), _pct(r["stds"][m])]
        out.append(line)
    _write_csv(path, header, out)
    return path


def _emit_svg(dicts: list[dict], out_dir) -> list[str]:
    try:
        import matplotlib
        matplotlib.use("svg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise StrokekitError(
            "svg output needs matplotlib (pip install strokekit[plots])") from exc

    written = []
    labeled = []
    for rec in dicts:
        if rec.get("error") is not None:
            continue
        rep = rec["cv"]["mean"] if rec.get("cv") else rec.get("holdout")
        cfg = rec["config"]
        labeled.append((f"{cfg['optimizer']['kind']}+{cfg['classifier']['kind']}",
                        100.0 * rep["accuracy"]))
    if labeled:
        fig, ax = plt.subplots(figsize=(max(6, 0.6 * len(labeled)), 4))
        ax.bar(range(len(labeled)), [v for _, v in labeled])
        ax.set_xticks(range(len(labeled)))
        ax.set_xticklabels([k for k, _ in labeled], rotation=60, ha="right",
                           fontsize=7)
        ax.set_ylabel("accuracy (%)")
        fig.tight_layout()
        path = os.path.join(out_dir, "accuracy_bars.svg")
        fig.savefig(path)
        plt.close(fig)
        written.append(path)

    for i, rec in enumerate(dicts):
        curves = rec.get("roc") or []
        if not curves:
            continue
        fig, ax = plt.subplots(figsize=(5, 4))
        for curve in curves:
            pts = np.asarray(curve["points"])
            ax.plot(pts[:, 0], pts[:, 1],
                    label=f"class {curve['class_id']} (AUC {curve['auc']:.3f})")
        ax.plot([0, 1], [0, 1], "k--", linewidth=0.7)
        ax.set_xlabel("false positive rate")
        ax.set_ylabel("true positive rate")
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = os.path.join(out_dir, f"roc_record{i}.svg")
        fig.savefig(path)
        plt.close(fig)
        written.append(path)
    return written
