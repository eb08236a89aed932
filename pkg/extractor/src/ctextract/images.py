"""Image discovery, decoding, and augmentation.

The image root holds class-named subdirectories, optionally nested under
train/test/val split directories. Discovery order is sorted by relative
path so extraction output is stable across runs.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import UndecodableImage, ValidationError
from .job import AugmentationSpec

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"}

_SPLIT_ALIASES = {
    "train": "train", "training": "train",
    "test": "test", "testing": "test",
    "val": "val", "valid": "val", "validation": "val",
}

AUG_MARKER = "#aug"


@dataclass(frozen=True)
class ImageRecord:
    sample_id: str
    path: str
    label: str
    split: str  # "train", "test", "val", or ""


def _sanitize(rel_path: str) -> str:
    stem = os.path.splitext(rel_path)[0]
    return stem.replace(os.sep, "/").replace(",", "_").replace("#", "_")


def discover_images(root) -> list[ImageRecord]:
    """Find images under class dirs, with or without a split level."""
    root = os.path.abspath(root)
    if not os.path.isdir(root):
        raise ValidationError(f"image root {root} is not a directory")
    top = sorted(d for d in os.listdir(root)
                 if os.path.isdir(os.path.join(root, d)))
    if not top:
        raise ValidationError(f"image root {root} has no subdirectories")

    split_layout = all(d.lower() in _SPLIT_ALIASES for d in top)
    records = []
    if split_layout:
        for split_dir in top:
            split = _SPLIT_ALIASES[split_dir.lower()]
            base = os.path.join(root, split_dir)
            for label in sorted(os.listdir(base)):
                class_dir = os.path.join(base, label)
                if not os.path.isdir(class_dir):
                    continue
                for name in sorted(os.listdir(class_dir)):
                    if os.path.splitext(name)[1].lower() not in IMAGE_EXTENSIONS:
                        continue
                    rel = os.path.join(split_dir, label, name)
                    records.append(ImageRecord(
                        sample_id=_sanitize(rel),
                        path=os.path.join(class_dir, name),
                        label=label, split=split))
    else:
        for label in top:
            class_dir = os.path.join(root, label)
            for name in sorted(os.listdir(class_dir)):
                if os.path.splitext(name)[1].lower() not in IMAGE_EXTENSIONS:
                    continue
                rel = os.path.join(label, name)
                records.append(ImageRecord(
                    sample_id=_sanitize(rel),
                    path=os.path.join(class_dir, name),
                    label=label, split=""))
    if not records:
        raise ValidationError(f"no images found under {root}")
    return sorted(records, key=lambda r: r.sample_id)


def decode_image(path) -> Image.Image:
    try:
        with Image.open(path) as img:
            return img.convert("RGB")
    except Exception as exc:  # PIL raises a zoo of types for broken files
        raise UndecodableImage(path, exc) from exc


def to_network_input(img: Image.Image, size: int) -> np.ndarray:
    """Resize to the network's square input; pixels stay in 0..255 here
    (each architecture's published preprocessing rescales them later)."""
    resized = img.resize((size, size), Image.BILINEAR)
    return np.asarray(resized, dtype=np.float32)


def augment_image(img: Image.Image, spec: AugmentationSpec,
                  rng: np.random.Generator) -> Image.Image:
    """One random flip/rotation/scale/crop variant of a decoded image."""
    out = img
    if spec.flip and rng.random() < 0.5:
        out = out.transpose(Image.FLIP_LEFT_RIGHT)
    if spec.rotation_deg > 0:
        angle = float(rng.uniform(-spec.rotation_deg, spec.rotation_deg))
        out = out.rotate(angle, resample=Image.BILINEAR, fillcolor=(0, 0, 0))
    if spec.scale > 0:
        factor = float(rng.uniform(1.0 - spec.scale, 1.0 + spec.scale))
        w, h = out.size
        out = out.resize((max(1, round(w * factor)),
                          max(1, round(h * factor))), Image.BILINEAR)
    if spec.crop < 1.0:
        w, h = out.size
        cw, ch = max(1, int(w * spec.crop)), max(1, int(h * spec.crop))
        left = int(rng.integers(0, w - cw + 1))
        top = int(rng.integers(0, h - ch + 1))
        out = out.crop((left, top, left + cw, top + ch))
    return out
