"""Command-line interface.

Subcommands: run, grid, cv, curve, bench, report, inspect.
Exit codes: 0 success, 1 validation error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .config import PipelineConfig
from .data import SPLIT_NAMES, is_augmented, load_features
from .errors import StrokekitError, ValidationError
from .evaluate import benchmark, cross_validate, learning_curve
from .pipeline import (
    ExperimentGrid,
    emit_curve_csv,
    emit_report,
    run_and_bundle,
    run_grid,
)


def _load_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config file {path} is not valid JSON: {exc}") from None


def _config_from_args(args) -> PipelineConfig:
    obj = _load_json(args.config)
    config = PipelineConfig.from_dict(obj)
    if getattr(args, "seed", None) is not None:
        clf = replace(config.classifier, seed=args.seed)
        config = replace(config, seed=args.seed, classifier=clf)
    return config


def _formats(args) -> tuple:
    return tuple(f.strip() for f in args.format.split(",") if f.strip())


def cmd_run(args) -> int:
    config = _config_from_args(args)
    bundle = f"{args.out}/bundle.json" if args.out else None
    if args.out:
        import os
        os.makedirs(args.out, exist_ok=True)
    record, _ = run_and_bundle(config, bundle_path=bundle, with_bench=args.bench)
    if args.out:
        files = emit_report([record], args.out, _formats(args))
        print("\n".join(files + ([bundle] if bundle else [])))
    report = record.mean_report
    pct = report.as_percent()
    print(f"accuracy={pct['accuracy']:.2f}% precision={pct['precision']:.2f}% "
          f"recall={pct['recall']:.2f}% f1={pct['f1']:.2f}%")
    if record.bench is not None:
        print(record.bench.format_row())
    return 0


def cmd_grid(args) -> int:
    grid = ExperimentGrid.from_dict(_load_json(args.config))
    records, summary = run_grid(grid, parallelism=args.parallel)
    if args.out:
        emit_report(records, args.out, _formats(args), summary=summary)
    failures = [row for row in summary if row["error"]]
    for row in summary:
        if row["error"]:
            print(f"[failed] {row['extractor']}+{row['optimizer']}"
                  f"+{row['classifier']}: {row['error']}")
        else:
            flag = " <best>" if row["best"] else ""
            print(f"#{row['rank']:>3} {row['extractor']}+{row['optimizer']}"
                  f"+{row['classifier']}: acc={100 * row['accuracy']:.2f}%"
                  f" f1={100 * row['f1']:.2f}%{flag}")
    return 0 if not failures else 2


def cmd_cv(args) -> int:
    config = _config_from_args(args)
    from .data import load_features as load
    matrix, labels, _ = load(config.features_path)
    k = args.k if args.k is not None else config.evaluation.k
    result = cross_validate(config, matrix.values, labels, k, config.seed,
                            sample_ids=matrix.sample_ids)
    for i, rep in enumerate(result.per_fold, start=1):
        pct = rep.as_percent()
        print(f"fold {i:>2}: acc={pct['accuracy']:.2f}% prec={pct['precision']:.2f}% "
              f"rec={pct['recall']:.2f}% f1={pct['f1']:.2f}%")
    pct = result.mean.as_percent()
    print(f"mean   : acc={pct['accuracy']:.2f}% prec={pct['precision']:.2f}% "
          f"rec={pct['recall']:.2f}% f1={pct['f1']:.2f}%")
    return 0


def cmd_curve(args) -> int:
    config = _config_from_args(args)
    matrix, labels, _ = load_features(config.features_path)
    fractions = [float(tok) for tok in args.fractions.split(",") if tok.strip()]
    k = args.k if args.k is not None else config.evaluation.k
    rows = learning_curve(config, matrix.values, labels, fractions, k, config.seed)
    for row in rows:
        print(f"fraction {row.fraction:.3f} (n={row.n_samples}): "
              f"acc={100 * row.means['accuracy']:.2f}%"
              f" ± {100 * row.stds['accuracy']:.2f}%")
    if args.out:
        print(emit_curve_csv(rows, args.out))
    return 0


def cmd_bench(args) -> int:
    config = _config_from_args(args)
    matrix, labels, _ = load_features(config.features_path)
    report = benchmark(config, matrix.values, labels, repetitions=args.repetitions)
    print(report.format_row())
    if args.out:
        import os
        os.makedirs(args.out, exist_ok=True)
        path = f"{args.out}/bench.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(path)
    return 0


def cmd_report(args) -> int:
    with open(args.records, "r", encoding="utf-8") as fh:
        records = json.load(fh)
    if not isinstance(records, list):
        records = [records]
    files = emit_report(records, args.out, _formats(args))
    print("\n".join(files))
    return 0


def cmd_inspect(args) -> int:
    matrix, labels, split = load_features(args.features)
    print(f"samples:  {matrix.n_samples}")
    print(f"features: {matrix.n_features}")
    counts = labels.counts()
    for code, name in enumerate(labels.class_names):
        print(f"class {name!r} ({code}): {int(counts[code])}")
    if split is not None:
        for tag, count in zip(SPLIT_NAMES, split.counts()):
            print(f"split {tag}: {count}")
    else:
        print("split column: empty (computed splits will be used)")
    n_aug = sum(1 for s in matrix.sample_ids if is_augmented(s))
    print(f"augmented rows: {n_aug}")
    print("OK")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strokekit",
        description="Feature-engineering and classification pipeline for "
                    "CT brain-stroke feature CSVs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="JSON config file")
            p.add_argument("--seed", type=int, default=None,
                           help="override the config seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--format", default="csv,json",
                       help="comma list of csv,json,svg")

    p = sub.add_parser("run", help="run one configuration")
    common(p)
    p.add_argument("--bench", action="store_true",
                   help="also record a timing/memory benchmark")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("grid", help="run a grid of configurations")
    common(p)
    p.add_argument("--parallel", type=int, default=1)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("cv", help="k-fold cross-validation for one config")
    common(p)
    p.add_argument("--k", type=int, default=None)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("curve", help="learning curve over training fractions")
    common(p)
    p.add_argument("--fractions", default="0.1,0.25,0.5,0.75,1.0")
    p.add_argument("--k", type=int, default=None)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("bench", help="timing/memory benchmark for one config")
    common(p)
    p.add_argument("--repetitions", type=int, default=5)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="re-emit artifacts from stored records")
    p.add_argument("--records", required=True, help="records.json from a run")
    p.add_argument("--out", required=True)
    p.add_argument("--format", default="csv,json")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("inspect", help="validate a features CSV")
    p.add_argument("features")
    p.set_defaults(func=cmd_inspect)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except StrokekitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 2


if __name__ == "__main__":
    sys.exit(main())
