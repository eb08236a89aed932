"""Run images through a pretrained CNN with its head removed and write the
feature CSV plus a provenance sidecar.

The penultimate representation is the globally average-pooled activation
preceding the removed classification head; its width is probed from the
built model at runtime rather than hard-coded. Each architecture's
published preprocessing is applied to the raw 0..255 pixels (it subsumes
the plain [0,1] rescale). Floats are written with repr so reloading is
lossless and re-runs are byte-identical when augmentation is off.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import os

import numpy as np

from .errors import ExtractorError, MissingWeights, UndecodableImage, ValidationError
from .images import (
    AUG_MARKER,
    augment_image,
    decode_image,
    discover_images,
    to_network_input,
)
from .job import ExtractionJob

log = logging.getLogger("ctextract")

# architecture -> (keras builder name, preprocessing module, recipe note)
_REGISTRY = {
    "DenseNet201": ("DenseNet201", "densenet",
                    "x/255, then ImageNet mean/std normalization"),
    "InceptionV3": ("InceptionV3", "inception_v3",
                    "x/127.5 - 1 (covers the [0,1] rescale)"),
    "MobileNetV2": ("MobileNetV2", "mobilenet_v2",
                    "x/127.5 - 1 (covers the [0,1] rescale)"),
    "ResNet50": ("ResNet50", "resnet",
                 "RGB->BGR, ImageNet channel-mean subtraction"),
    "Xception": ("Xception", "xception",
                 "x/127.5 - 1 (covers the [0,1] rescale)"),
}


def build_model(architecture: str, weights: str, input_size: int, seed: int):
    """Build the headless, average-pooled network.

    Returns (model, preprocess_fn, weight_source_label). `weights` is
    "imagenet" (published pretrained source), "random" (seeded
    initialization for offline smoke runs), or a local weights file path.
    """
    import tensorflow as tf

    builder_name, module_name, _ = _REGISTRY[architecture]
    builder = getattr(tf.keras.applications, builder_name)
    module = getattr(tf.keras.applications, module_name)

    if weights == "random":
        tf.keras.utils.set_random_seed(seed)
        load = None
        source = f"random(seed={seed})"
    elif weights == "imagenet":
        load = "imagenet"
        source = "imagenet"
    else:
        if not os.path.exists(weights):
            raise MissingWeights(architecture, f"no such file: {weights}")
        load = weights
        source = f"file:{os.path.basename(weights)}"

    try:
        model = builder(include_top=False, weights=load, pooling="avg",
                        input_shape=(input_size, input_size, 3))
    except MissingWeights:
        raise
    except Exception as exc:
        raise MissingWeights(architecture, exc) from exc
    return model, module.preprocess_input, source


def weights_checksum(model) -> str:
    digest = hashlib.sha256()
    for w in model.get_weights():
        digest.update(np.ascontiguousarray(w).tobytes())
    return digest.hexdigest()


def extract_features(job: ExtractionJob) -> dict:
    """Extract pooled features for every decodable image under the root.

    Writes the feature CSV at job.output_path and a JSON sidecar next to
    it; returns a summary dict. Undecodable images are skipped with a log
    line; missing pretrained weights abort.
    """
    records = discover_images(job.image_root)
    model, preprocess, weight_source = build_model(
        job.architecture, job.weights, job.input_size, job.seed)
    width = int(model.output_shape[-1])
    rng = np.random.default_rng(job.seed)

    rows: list[tuple[str, str, str]] = []   # (id, label, split)
    pixels: list[np.ndarray] = []
    skipped = []
    for record in records:
        try:
            img = decode_image(record.path)
        except UndecodableImage as exc:
            log.warning("skipping %s", exc)
            skipped.append(record.path)
            continue
        rows.append((record.sample_id, record.label, record.split))
        pixels.append(to_network_input(img, job.input_size))
        if job.augmentation is not None:
            for k in range(job.augmentation.copies):
                variant = augment_image(img, job.augmentation, rng)
                rows.append((f"{record.sample_id}{AUG_MARKER}{k}",
                             record.label, record.split))
                pixels.append(to_network_input(variant, job.input_size))
    if not rows:
        raise ValidationError("no decodable images found")

    features = np.empty((len(rows), width), dtype=np.float64)
    for start in range(0, len(rows), job.batch_size):
        batch = np.stack(pixels[start:start + job.batch_size])
        out = model.predict(preprocess(batch), verbose=0,
                            batch_size=job.batch_size)
        features[start:start + batch.shape[0]] = out.astype(np.float64)
    if not np.all(np.isfinite(features)):
        raise ExtractorError("network produced non-finite activations")

    with open(job.output_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "label", "split"]
                        + [f"f{i}" for i in range(width)])
        for (sample_id, label, split), vec in zip(rows, features):
            writer.writerow([sample_id, label, split]
                            + [repr(float(v)) for v in vec])

    sidecar = {
        "architecture": job.architecture,
        "input_size": job.input_size,
        "pooling": "global_average",
        "preprocessing": _REGISTRY[job.architecture][2],
        "weights": weight_source,
        "weights_sha256": weights_checksum(model),
        "feature_width": width,
        "n_source_images": len(records) - len(skipped),
        "n_skipped": len(skipped),
        "n_rows": len(rows),
        "augmentation": (None if job.augmentation is None
                         else dataclasses.asdict(job.augmentation)),
        "seed": job.seed,
    }
    sidecar_path = f"{job.output_path}.meta.json"
    with open(sidecar_path, "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")

    return {"output_path": job.output_path, "sidecar_path": sidecar_path,
            "feature_width": width, "n_rows": len(rows),
            "n_skipped": len(skipped)}
