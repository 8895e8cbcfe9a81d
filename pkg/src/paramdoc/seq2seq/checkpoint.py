"""Model checkpoint container.

Layout: 8-byte magic, big-endian uint32 header length, UTF-8 JSON header
(version, dims, vocab, array manifest), the raw float64 array payload in
manifest order (row-major, little-endian), then a trailing SHA-256 over
everything before it. Writing the same model always yields the same
bytes.
"""

from __future__ import annotations

import hashlib
import json
import struct

import numpy as np

from ..errors import ValidationError
from .gru import GruCellParams, GruModel
from .training import PARAM_NAMES, _param_arrays
from .vocab import Vocab

MAGIC = b"PDOCGRU\x01"
CHECKPOINT_VERSION = 1


def save_model(model: GruModel, path: str) -> None:
    params = _param_arrays(model)
    header = {
        "version": CHECKPOINT_VERSION,
        "hidden_dim": model.hidden_dim,
        "input_dim": model.input_dim,
        "vocab": list(model.vocab.symbols),
        "arrays": [[name, list(params[name].shape)] for name in PARAM_NAMES],
    }
    header_bytes = json.dumps(header, ensure_ascii=True, separators=(",", ":")).encode("ascii")
    payload = b"".join(
        np.ascontiguousarray(params[name], dtype="<f8").tobytes() for name in PARAM_NAMES
    )
    body = MAGIC + struct.pack(">I", len(header_bytes)) + header_bytes + payload
    with open(path, "wb") as fh:
        fh.write(body)
        fh.write(hashlib.sha256(body).digest())


def load_model(path: str) -> GruModel:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(MAGIC) + 4 + 32 or not blob.startswith(MAGIC):
        raise ValidationError(f"checkpoint {path}: not a model checkpoint")
    body, digest = blob[:-32], blob[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise ValidationError(f"checkpoint {path}: integrity digest mismatch")
    header_len = struct.unpack(">I", body[len(MAGIC) : len(MAGIC) + 4])[0]
    header_start = len(MAGIC) + 4
    header = json.loads(body[header_start : header_start + header_len].decode("ascii"))
    if header.get("version") != CHECKPOINT_VERSION:
        raise ValidationError(f"checkpoint {path}: unsupported version {header.get('version')}")

    arrays = {}
    offset = header_start + header_len
    for name, shape in header["arrays"]:
        count = int(np.prod(shape))
        raw = body[offset : offset + count * 8]
        if len(raw) != count * 8:
            raise ValidationError(f"checkpoint {path}: truncated array {name!r}")
        arrays[name] = np.frombuffer(raw, dtype="<f8").reshape(shape).astype(float)
        offset += count * 8
    if offset != len(body):
        raise ValidationError(f"checkpoint {path}: trailing bytes after arrays")

    def cell(prefix: str) -> GruCellParams:
        return GruCellParams(
            W_z=arrays[f"{prefix}.W_z"],
            U_z=arrays[f"{prefix}.U_z"],
            W_r=arrays[f"{prefix}.W_r"],
            U_r=arrays[f"{prefix}.U_r"],
            W=arrays[f"{prefix}.W"],
            U=arrays[f"{prefix}.U"],
        )

    return GruModel(
        vocab=Vocab(symbols=tuple(header["vocab"])),
        embedding=arrays["embedding"],
        encoder=cell("encoder"),
        decoder=cell("decoder"),
        output_proj=arrays["output_proj"],
        hidden_dim=header["hidden_dim"],
        input_dim=header["input_dim"],
    )
