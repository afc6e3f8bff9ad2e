"""File-backed model store with canonical JSON payloads and checksums.

Records serialize deterministically (sorted keys, shortest-roundtrip floats),
so semantically equal models produce identical bytes and reloading yields
bit-identical predictions.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass, field

from .data import Encoder
from .ensemble import EnsembleModel

FORMAT_VERSION = 1


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_digest(config_dict):
    return hashlib.sha256(canonical_json(config_dict).encode()).hexdigest()[:16]


@dataclass
class ModelRecord:
    """A deployable per-defect-type model: ensemble + encoding statistics."""

    name: str
    encoder: Encoder
    ensemble: EnsembleModel
    metadata: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    def predict_setting(self, natural_row):
        """(class, risk) for one natural-unit row in schema order."""
        x = self.encoder.encode_row(natural_row)
        classes, risks = self.ensemble.predict(x)
        return int(classes[0]), float(risks[0])

    def to_payload(self):
        return {
            "name": self.name,
            "format_version": self.format_version,
            "encoder": self.encoder.to_dict(),
            "ensemble": self.ensemble.to_dict(),
            "metadata": self.metadata,
        }

    @classmethod
    def from_payload(cls, payload):
        version = int(payload.get("format_version", -1))
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported version {version}, expected {FORMAT_VERSION}")
        return cls(
            name=payload["name"],
            encoder=Encoder.from_dict(payload["encoder"]),
            ensemble=EnsembleModel.from_dict(payload["ensemble"]),
            metadata=dict(payload.get("metadata", {})),
            format_version=version,
        )


def model_id(name):
    slug = re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")
    if not slug:
        raise ValueError(f"cannot derive a store id from name {name!r}")
    return slug


def _index_path(store_dir):
    return os.path.join(store_dir, "index.json")


def _read_index(store_dir):
    path = _index_path(store_dir)
    if not os.path.exists(path):
        return {"models": {}}
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def save_model(record, store_dir):
    """Persist one record; returns the store id."""
    os.makedirs(store_dir, exist_ok=True)
    payload = record.to_payload()
    body = canonical_json(payload)
    checksum = hashlib.sha256(body.encode()).hexdigest()
    mid = model_id(record.name)
    with open(os.path.join(store_dir, f"{mid}.json"), "w", encoding="utf-8") as fh:
        fh.write(canonical_json({"checksum": checksum, "payload": payload}) + "\n")
    index = _read_index(store_dir)
    index["models"][mid] = {"name": record.name, "file": f"{mid}.json"}
    with open(_index_path(store_dir), "w", encoding="utf-8") as fh:
        fh.write(canonical_json(index) + "\n")
    return mid


def load_model(store_dir, mid):
    """Load a record by id, verifying checksum and format version."""
    index = _read_index(store_dir)
    if mid not in index["models"]:
        raise KeyError(f"unknown model id {mid!r}")
    path = os.path.join(store_dir, index["models"][mid]["file"])
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    body = canonical_json(doc["payload"])
    if hashlib.sha256(body.encode()).hexdigest() != doc["checksum"]:
        raise ValueError(f"corrupt payload for model {mid!r}: checksum mismatch")
    return ModelRecord.from_payload(doc["payload"])


def list_models(store_dir):
    index = _read_index(store_dir)
    return sorted(index["models"])
