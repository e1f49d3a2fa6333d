"""LTXT matrix files: magic "LTXT", u32 version, u64 rows, u64 cols,
then rows*cols little-endian float32 values in row-major order."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from anatomy.errors import InputFormatError, ValidationError

MAGIC = b"LTXT"
VERSION = 1
_HEADER = struct.Struct("<4sIQQ")


def write_matrix(path, matrix: np.ndarray) -> None:
    arr = np.ascontiguousarray(matrix, dtype="<f4")
    if arr.ndim != 2:
        raise ValidationError(f"LTXT stores 2-d matrices, got shape {matrix.shape}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, arr.shape[0], arr.shape[1]))
        fh.write(arr.tobytes())


def read_matrix(path) -> np.ndarray:
    path = Path(path)
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise InputFormatError(f"{path}: truncated LTXT header")
        magic, version, rows, cols = _HEADER.unpack(header)
        if magic != MAGIC:
            raise InputFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise InputFormatError(f"{path}: unsupported LTXT version {version}")
        data = fh.read(rows * cols * 4)
    if len(data) != rows * cols * 4:
        raise InputFormatError(f"{path}: expected {rows * cols} float32 values, file truncated")
    return np.frombuffer(data, dtype="<f4").reshape(rows, cols).copy()
