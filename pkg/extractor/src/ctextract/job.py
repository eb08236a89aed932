"""Extraction job description and validation."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError

ARCHITECTURES = ("DenseNet201", "InceptionV3", "MobileNetV2", "ResNet50",
                 "Xception")

# InceptionV3 and Xception take 299x299 inputs; the other three take 224x224.
INPUT_SIZES = {
    "DenseNet201": 224,
    "InceptionV3": 299,
    "MobileNetV2": 224,
    "ResNet50": 224,
    "Xception": 299,
}


@dataclass(frozen=True)
class AugmentationSpec:
    """Random flip/rotation/scale/crop variants appended per image."""

    copies: int = 1
    flip: bool = True
    rotation_deg: float = 15.0
    scale: float = 0.1          # resize factor drawn from [1-scale, 1+scale]
    crop: float = 0.9           # crop window fraction of the image

    def __post_init__(self):
        if self.copies < 1:
            raise ValidationError("augmentation copies must be >= 1")
        if self.rotation_deg < 0:
            raise ValidationError("rotation_deg must be >= 0")
        if not 0.0 <= self.scale < 1.0:
            raise ValidationError("scale jitter must lie in [0, 1)")
        if not 0.0 < self.crop <= 1.0:
            raise ValidationError("crop fraction must lie in (0, 1]")


@dataclass(frozen=True)
class ExtractionJob:
    image_root: str
    architecture: str
    output_path: str
    input_size: int | None = None     # derived from the architecture if None
    augmentation: AugmentationSpec | None = None
    weights: str = "imagenet"         # "imagenet", "random", or a local path
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ValidationError(
                f"unknown architecture {self.architecture!r} "
                f"(expected one of {ARCHITECTURES})")
        required = INPUT_SIZES[self.architecture]
        if self.input_size is None:
            object.__setattr__(self, "input_size", required)
        elif self.input_size != required:
            raise ValidationError(
                f"{self.architecture} requires {required}x{required} inputs, "
                f"got {self.input_size}")
        if self.batch_size < 1:
            raise ValidationError("batch_size must be >= 1")
