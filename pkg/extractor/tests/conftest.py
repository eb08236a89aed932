from __future__ import annotations

import numpy as np
import pytest
from PIL import Image


def make_image_tree(root, classes=("Normal", "Ischemic", "Hemorrhagic"),
                    per_class=3, size=48, seed=0, split_dirs=False):
    """Write a tiny deterministic PNG tree in the expected folder layout."""
    rng = np.random.default_rng(seed)
    splits = ("train", "test", "val") if split_dirs else (None,)
    for split in splits:
        base = root / split if split else root
        for label in classes:
            class_dir = base / label
            class_dir.mkdir(parents=True, exist_ok=True)
            for i in range(per_class):
                arr = rng.integers(0, 256, size=(size, size, 3), dtype=np.uint8)
                Image.fromarray(arr).save(class_dir / f"img{i:03d}.png")
    return root


@pytest.fixture(scope="session")
def flat_tree(tmp_path_factory):
    return make_image_tree(tmp_path_factory.mktemp("flat"), per_class=3)


@pytest.fixture(scope="session")
def split_tree(tmp_path_factory):
    return make_image_tree(tmp_path_factory.mktemp("split"), per_class=2,
                           split_dirs=True)


@pytest.fixture(scope="session")
def mobilenet_extraction(tmp_path_factory, flat_tree):
    """One shared MobileNetV2 extraction (random seeded weights, no aug)."""
    from ctextract import ExtractionJob, extract_features

    out = tmp_path_factory.mktemp("out") / "mobilenetv2.csv"
    job = ExtractionJob(image_root=str(flat_tree), architecture="MobileNetV2",
                        output_path=str(out), weights="random", seed=11,
                        batch_size=4)
    summary = extract_features(job)
    return job, summary
