from __future__ import annotations

import numpy as np
import pytest
from PIL import Image

from ctextract import (
    AugmentationSpec,
    ExtractionJob,
    UndecodableImage,
    ValidationError,
    augment_image,
    decode_image,
    discover_images,
)
from ctextract.images import to_network_input


class TestDiscovery:
    def test_flat_layout(self, flat_tree):
        records = discover_images(flat_tree)
        assert len(records) == 9
        assert {r.label for r in records} == {"Normal", "Ischemic", "Hemorrhagic"}
        assert all(r.split == "" for r in records)
        ids = [r.sample_id for r in records]
        assert ids == sorted(ids)

    def test_split_layout(self, split_tree):
        records = discover_images(split_tree)
        assert len(records) == 18
        assert {r.split for r in records} == {"train", "test", "val"}

    def test_missing_root(self, tmp_path):
        with pytest.raises(ValidationError):
            discover_images(tmp_path / "nope")

    def test_ids_safe_for_csv(self, tmp_path):
        d = tmp_path / "lesions"
        d.mkdir(parents=True)
        Image.new("RGB", (8, 8)).save(d / "a#1,x.png")
        records = discover_images(tmp_path)
        assert "," not in records[0].sample_id
        assert "#" not in records[0].sample_id
        assert records[0].sample_id == "lesions/a_1_x"


class TestDecoding:
    def test_undecodable_raises(self, tmp_path):
        bad = tmp_path / "bad.png"
        bad.write_bytes(b"this is not a png")
        with pytest.raises(UndecodableImage):
            decode_image(bad)

    def test_grayscale_promoted_to_rgb(self, tmp_path):
        path = tmp_path / "gray.png"
        Image.new("L", (16, 16), color=100).save(path)
        arr = to_network_input(decode_image(path), 32)
        assert arr.shape == (32, 32, 3)
        assert arr.dtype == np.float32


class TestAugmentation:
    def test_deterministic_with_seed(self, flat_tree):
        records = discover_images(flat_tree)
        img = decode_image(records[0].path)
        spec = AugmentationSpec(copies=1)
        a = augment_image(img, spec, np.random.default_rng(5))
        b = augment_image(img, spec, np.random.default_rng(5))
        assert np.array_equal(np.asarray(a), np.asarray(b))

    def test_crop_changes_size(self, flat_tree):
        records = discover_images(flat_tree)
        img = decode_image(records[0].path)
        spec = AugmentationSpec(copies=1, flip=False, rotation_deg=0.0,
                                scale=0.0, crop=0.5)
        out = augment_image(img, spec, np.random.default_rng(0))
        assert out.size == (img.size[0] // 2, img.size[1] // 2)

    def test_spec_validation(self):
        with pytest.raises(ValidationError):
            AugmentationSpec(copies=0)
        with pytest.raises(ValidationError):
            AugmentationSpec(crop=0.0)
        with pytest.raises(ValidationError):
            AugmentationSpec(scale=1.5)


class TestJobValidation:
    def test_input_size_invariant(self, tmp_path):
        for arch, size in (("InceptionV3", 299), ("Xception", 299),
                           ("MobileNetV2", 224), ("ResNet50", 224),
                           ("DenseNet201", 224)):
            job = ExtractionJob(image_root=str(tmp_path), architecture=arch,
                                output_path="out.csv")
            assert job.input_size == size
        with pytest.raises(ValidationError):
            ExtractionJob(image_root=str(tmp_path), architecture="Xception",
                          output_path="out.csv", input_size=224)

    def test_unknown_architecture(self, tmp_path):
        with pytest.raises(ValidationError):
            ExtractionJob(image_root=str(tmp_path), architecture="VGG16",
                          output_path="out.csv")
