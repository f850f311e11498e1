"""Flat checkpoint format: a JSON manifest plus a little-endian float64 payload.

The manifest records tensor names, shapes, and byte offsets into the payload
file, plus a free-form metadata dict for scalers and configuration.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import MissingArtifactError, ValidationError

MANIFEST_NAME = "manifest.json"
PAYLOAD_NAME = "params.bin"


def save_checkpoint(
    tensors: dict[str, np.ndarray],
    directory: str | Path,
    metadata: dict | None = None,
) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    offset = 0
    blobs = []
    for name in sorted(tensors):
        arr = np.asarray(tensors[name], dtype="<f8")
        entries.append({"name": name, "shape": list(arr.shape), "offset": offset})
        blobs.append(arr.tobytes(order="C"))
        offset += arr.nbytes
    (directory / PAYLOAD_NAME).write_bytes(b"".join(blobs))
    manifest = {"tensors": entries, "metadata": metadata or {}}
    (directory / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2), encoding="utf-8")


def load_checkpoint(directory: str | Path) -> tuple[dict[str, np.ndarray], dict]:
    directory = Path(directory)
    manifest_path = directory / MANIFEST_NAME
    payload_path = directory / PAYLOAD_NAME
    if not manifest_path.exists() or not payload_path.exists():
        raise MissingArtifactError(f"no checkpoint at {directory}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    payload = payload_path.read_bytes()
    tensors = {}
    for entry in manifest["tensors"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        end = start + count * 8
        if end > len(payload):
            raise ValidationError(f"checkpoint payload truncated at {entry['name']}")
        arr = np.frombuffer(payload[start:end], dtype="<f8").reshape(shape)
        tensors[entry["name"]] = arr.copy()
    return tensors, manifest.get("metadata", {})
