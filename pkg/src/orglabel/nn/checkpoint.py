"""Checkpoint container: JSON manifest line + raw little-endian float64 arrays.

The first line of a checkpoint file is a compact JSON manifest carrying the
model kind, dimensions, class count, vocabulary content hash, a config echo,
and an array catalog (name, shape, byte offset into the binary section, in
storage order). The binary section is the catalog's arrays concatenated as
little-endian IEEE-754 doubles. Loading verifies shapes and the vocab hash.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import DataFormatError
from .cells import CellParams
from .model import SequenceModelParams, is_bidirectional

FORMAT_NAME = "orglabel-checkpoint"
FORMAT_VERSION = 1


def write_container(path, manifest_extra: dict, arrays: list[tuple[str, np.ndarray]]):
    """Write a manifest+arrays container; arrays are stored in list order."""
    catalog = []
    offset = 0
    blobs = []
    for name, arr in arrays:
        arr = np.ascontiguousarray(arr, dtype=np.float64)
        blob = arr.astype("<f8", copy=False).tobytes()
        catalog.append({"name": name, "shape": list(arr.shape), "offset": offset})
        blobs.append(blob)
        offset += len(blob)
    manifest = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "arrays": catalog,
        **manifest_extra,
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(manifest, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        for blob in blobs:
            fh.write(blob)


def read_container(path) -> tuple[dict, dict[str, np.ndarray]]:
    """Read a container back as (manifest, name -> array)."""
    raw = Path(path).read_bytes()
    newline = raw.find(b"\n")
    if newline < 0:
        raise DataFormatError(f"{path}: missing manifest line")
    try:
        manifest = json.loads(raw[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"{path}: bad manifest: {exc}") from exc
    if manifest.get("format") != FORMAT_NAME:
        raise DataFormatError(f"{path}: not a {FORMAT_NAME} file")
    body = raw[newline + 1 :]
    arrays = {}
    for entry in manifest["arrays"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        end = start + count * 8
        if end > len(body):
            raise DataFormatError(
                f"{path}: array {entry['name']!r} extends past end of file"
            )
        arr = np.frombuffer(body[start:end], dtype="<f8").reshape(shape)
        arrays[entry["name"]] = np.array(arr, dtype=np.float64)
    return manifest, arrays


def save_model(path, params: SequenceModelParams, vocab_hash: str, config: dict):
    extra = {
        "kind": params.kind,
        "embedding_dim": params.embedding_dim,
        "hidden_dim": params.hidden_dim,
        "num_classes": params.num_classes,
        "vocab_size": params.embedding.shape[0],
        "vocab_hash": vocab_hash,
        "embedding_trainable": params.embedding_trainable,
        "config": config,
    }
    write_container(path, extra, params.catalog())


def load_model(path, vocab_hash: str | None = None) -> SequenceModelParams:
    manifest, arrays = read_container(path)
    if vocab_hash is not None and manifest.get("vocab_hash") != vocab_hash:
        raise DataFormatError(
            f"{path}: vocab hash mismatch "
            f"(checkpoint {manifest.get('vocab_hash')!r} vs current {vocab_hash!r})"
        )
    kind = manifest["kind"]
    d = manifest["embedding_dim"]
    h = manifest["hidden_dim"]
    cell_kind = "lstm" if kind == "bilstm" else kind

    def cell_from(prefix):
        return CellParams(
            kind=cell_kind,
            input_dim=d,
            hidden_dim=h,
            w_x=arrays[f"{prefix}.w_x"],
            w_h=arrays[f"{prefix}.w_h"],
            b=arrays[f"{prefix}.b"],
        )

    try:
        params = SequenceModelParams(
            kind=kind,
            embedding=arrays["embedding"],
            embedding_trainable=bool(manifest["embedding_trainable"]),
            forward_cell=cell_from("fwd"),
            backward_cell=cell_from("bwd") if is_bidirectional(kind) else None,
            w_out=arrays["out.w"],
            b_out=arrays["out.b"],
        )
    except (KeyError, ValueError) as exc:
        raise DataFormatError(f"{path}: inconsistent checkpoint: {exc}") from exc
    if params.embedding.shape != (manifest["vocab_size"], d):
        raise DataFormatError(f"{path}: embedding shape mismatch")
    if params.num_classes != manifest["num_classes"]:
        raise DataFormatError(f"{path}: class count mismatch")
    return params
