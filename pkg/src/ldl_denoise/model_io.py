"""Binary model serialization.

Layout (little-endian throughout):

    offset  size        field
    0       8           magic bytes b"LDLMODEL"
    8       1           format version (currently 1)
    9       4           d, uint32
    13      4           q, uint32
    17      8*d*q       W, float64, row-major
    ...     8*d*q       P, float64, row-major
    ...     8*q*q       Q, float64, row-major

Total size is 17 + 8 * (2*d*q + q*q) bytes.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import ParseError
from .types import Model

MAGIC = b"LDLMODEL"
VERSION = 1


def save_model(model, path):
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<B", VERSION))
        fh.write(struct.pack("<II", model.d, model.q))
        for arr in (model.W, model.P, model.Q):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_model(path):
    try:
        blob = open(path, "rb").read()
    except OSError as exc:
        raise ParseError(f"cannot read model file {path}: {exc}") from exc
    if len(blob) < 17 or blob[:8] != MAGIC:
        raise ParseError(f"{path} is not a model file (bad magic)")
    version = blob[8]
    if version != VERSION:
        raise ParseError(f"unsupported model format version {version}")
    d, q = struct.unpack("<II", blob[9:17])
    expected = 17 + 8 * (2 * d * q + q * q)
    if len(blob) != expected:
        raise ParseError(
            f"model file has {len(blob)} bytes, expected {expected} for d={d}, q={q}"
        )
    offset = 17
    mats = []
    for shape in ((d, q), (d, q), (q, q)):
        count = shape[0] * shape[1]
        mats.append(
            np.frombuffer(blob, dtype="<f8", count=count, offset=offset).reshape(shape).copy()
        )
        offset += 8 * count
    W, P, Q = mats
    return Model(W=W, P=P, Q=Q)
