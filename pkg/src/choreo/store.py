"""Versioned binary checkpoint container for trained models and transforms.

Layout: 5-byte magic ``CHOR1``, an 8-byte little-endian manifest length, a
canonical UTF-8 JSON manifest, then raw float32 little-endian tensor
payloads in manifest order. The canonical JSON encoding (sorted keys, no
whitespace) makes saves byte-deterministic, so save/load/save round trips
are byte-identical.
"""

from __future__ import annotations

import json
import struct

import numpy as np

MAGIC = b"CHOR1"
FORMAT_VERSION = 1


class StoreError(ValueError):
    pass


class UnrecognizedFormat(StoreError):
    pass


class TruncatedCheckpoint(StoreError):
    pass


def save_checkpoint(path, manifest: dict, tensors: dict[str, np.ndarray]) -> None:
    """Write a checkpoint; tensor payload order follows the dict order."""
    entries = []
    payload = bytearray()
    for name, arr in tensors.items():
        arr = np.asarray(arr, dtype=np.float64)
        entries.append({"name": name, "shape": list(arr.shape)})
        payload += arr.astype("<f4").tobytes()
    doc = dict(manifest)
    doc["format_version"] = FORMAT_VERSION
    doc["tensors"] = entries
    encoded = json.dumps(doc, sort_keys=True, separators=(",", ":"),
                         ensure_ascii=False).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(encoded)))
        fh.write(encoded)
        fh.write(bytes(payload))


def load_checkpoint(path):
    """Read a checkpoint; returns (manifest, tensors) with float64 arrays."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(MAGIC) + 8 or blob[: len(MAGIC)] != MAGIC:
        raise UnrecognizedFormat(f"{path}: unrecognized format (bad magic)")
    (manifest_len,) = struct.unpack("<Q", blob[5:13])
    body = blob[13:]
    if len(body) < manifest_len:
        raise TruncatedCheckpoint(f"{path}: truncated manifest")
    try:
        manifest = json.loads(body[:manifest_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise StoreError(f"{path}: corrupt manifest: {exc}") from exc
    if manifest.get("format_version") != FORMAT_VERSION:
        raise StoreError(
            f"{path}: unknown checkpoint version {manifest.get('format_version')!r}"
        )
    payload = body[manifest_len:]
    tensors: dict[str, np.ndarray] = {}
    offset = 0
    for entry in manifest.get("tensors", []):
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 4
        if offset + nbytes > len(payload):
            raise TruncatedCheckpoint(
                f"{path}: truncated payload for tensor {entry['name']!r}"
            )
        arr = np.frombuffer(payload, dtype="<f4", count=count, offset=offset)
        tensors[entry["name"]] = arr.astype(np.float64).reshape(shape)
        offset += nbytes
    if offset != len(payload):
        raise StoreError(f"{path}: {len(payload) - offset} trailing payload bytes")
    return manifest, tensors


# ---------------------------------------------------------------------------
# model-level helpers

def save_model(path, model, extra: dict | None = None) -> None:
    """Persist a model object exposing ``kind``, ``hyperparams()`` and ``state()``."""
    manifest = {
        "kind": model.kind,
        "hyperparams": model.hyperparams(),
    }
    if extra:
        manifest.update(extra)
    save_checkpoint(path, manifest, model.state())


def load_model(path):
    """Load any known model kind; returns (model, manifest)."""
    manifest, tensors = load_checkpoint(path)
    kind = manifest.get("kind")
    model_cls = _model_class(kind)
    if model_cls is None:
        raise StoreError(f"{path}: unknown model kind {kind!r}")
    try:
        model = model_cls.from_state(manifest["hyperparams"], tensors)
    except KeyError as exc:
        raise StoreError(f"{path}: checkpoint missing tensor or field {exc}") from exc
    return model, manifest


def _model_class(kind):
    # imported lazily to avoid circular imports with the model modules
    from .pose_ae import PoseAutoencoder
    from .seq_vae import SequenceVae
    from .seqrnn import SeqRnnModel

    return {
        PoseAutoencoder.kind: PoseAutoencoder,
        SequenceVae.kind: SequenceVae,
        SeqRnnModel.kind: SeqRnnModel,
    }.get(kind)
