"""Command-line entry point.

Exit codes: 0 success, 1 validation error, 2 runtime failure (including
missing pretrained weights).
"""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import ExtractorError, MissingWeights, ValidationError
from .extract import extract_features
from .job import ARCHITECTURES, AugmentationSpec, ExtractionJob


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctextract",
        description="Extract pooled penultimate-layer CNN features from an "
                    "image directory into a feature CSV.")
    parser.add_argument("--images", required=True,
                        help="image root (class dirs, optionally under "
                             "train/test/val dirs)")
    parser.add_argument("--arch", required=True, choices=ARCHITECTURES)
    parser.add_argument("--out", required=True, help="output CSV path")
    parser.add_argument("--weights", default="imagenet",
                        help="'imagenet' (default), 'random' (seeded, for "
                             "offline smoke runs), or a local weights file")
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--augment", type=int, default=0, metavar="COPIES",
                        help="augmented rows per image (default 0 = off)")
    parser.add_argument("--aug-rotation", type=float, default=15.0)
    parser.add_argument("--aug-scale", type=float, default=0.1)
    parser.add_argument("--aug-crop", type=float, default=0.9)
    parser.add_argument("--aug-no-flip", action="store_true")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        augmentation = None
        if args.augment > 0:
            augmentation = AugmentationSpec(
                copies=args.augment, flip=not args.aug_no_flip,
                rotation_deg=args.aug_rotation, scale=args.aug_scale,
                crop=args.aug_crop)
        job = ExtractionJob(
            image_root=args.images, architecture=args.arch,
            output_path=args.out, augmentation=augmentation,
            weights=args.weights, batch_size=args.batch_size, seed=args.seed)
        summary = extract_features(job)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (MissingWeights, ExtractorError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {summary['n_rows']} rows x {summary['feature_width']} "
          f"features to {summary['output_path']}")
    if summary["n_skipped"]:
        print(f"skipped {summary['n_skipped']} undecodable images")
    print(f"sidecar: {summary['sidecar_path']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
