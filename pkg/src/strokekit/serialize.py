"""Versioned JSON envelope with base64 matrix payloads.

Every persisted artifact (fitted transform, trained classifier, pipeline
bundle) is a JSON document::

    {"format": "<tag>", "version": 1, "checksum": "<sha256 of payload>",
     "payload": {...}}

Matrices travel as little-endian float64 bytes, base64 encoded, so a
round-trip is bit-exact and platform independent.
"""

from __future__ import annotations

import base64
import hashlib
import json
from typing import Any

import numpy as np

from .errors import CorruptPayload, VersionMismatch

SCHEMA_VERSION = 1


def encode_array(arr: np.ndarray) -> dict:
    a = np.ascontiguousarray(arr, dtype="<f8")
    return {
        "dtype": "float64le",
        "shape": list(a.shape),
        "data": base64.b64encode(a.tobytes()).decode("ascii"),
    }


def decode_array(obj: dict) -> np.ndarray:
    if obj.get("dtype") != "float64le":
        raise CorruptPayload(f"unsupported dtype {obj.get('dtype')!r}")
    raw = base64.b64decode(obj["data"])
    arr = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    return arr.reshape(obj["shape"])


def canonical_json(obj: Any) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def payload_checksum(payload: dict) -> str:
    return hashlib.sha256(canonical_json(payload)).hexdigest()


def wrap(payload: dict, format_tag: str) -> dict:
    return {
        "format": format_tag,
        "version": SCHEMA_VERSION,
        "checksum": payload_checksum(payload),
        "payload": payload,
    }


def unwrap(doc: dict, format_tag: str) -> dict:
    if doc.get("format") != format_tag:
        raise CorruptPayload(
            f"expected format {format_tag!r}, found {doc.get('format')!r}")
    version = doc.get("version")
    if version != SCHEMA_VERSION:
        raise VersionMismatch(found=version, supported=SCHEMA_VERSION)
    payload = doc.get("payload")
    if not isinstance(payload, dict):
        raise CorruptPayload("payload missing or not an object")
    if payload_checksum(payload) != doc.get("checksum"):
        raise CorruptPayload()
    return payload


def dump_envelope(doc: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_envelope(path, format_tag: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return unwrap(doc, format_tag)
