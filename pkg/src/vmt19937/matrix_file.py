"""On-disk format for precomputed jump matrices and squaring checkpoints.

Layout (all integers little-endian u32)::

    magic     b"VMTJ"
    version   1
    dimension d
    exponent  q          matrix is F ** (2 ** q)
    reserved  0
    [completed]          checkpoint files only: squarings done so far
    payload   d rows x ceil(d / 64) little-endian u64 words, padding bits zero

For d = 19937 the payload is 19937 * 312 * 8 bytes, a little over the
tightly packed d * d / 8 because rows are padded to whole words.
"""

from __future__ import annotations

import os
import struct
from pathlib import Path
from typing import NamedTuple, Union

import numpy as np

from .gf2 import F2Matrix, _nwords

__all__ = [
    "MAGIC",
    "VERSION",
    "FormatError",
    "JumpMatrixFile",
    "Checkpoint",
    "payload_nbytes",
    "write_jump_matrix",
    "read_jump_matrix",
    "write_checkpoint",
    "read_checkpoint",
]

MAGIC = b"VMTJ"
VERSION = 1
_HEADER = struct.Struct("<4sIIII")
_COMPLETED = struct.Struct("<I")

PathLike = Union[str, os.PathLike]


class FormatError(ValueError):
    """The file is not a jump matrix/checkpoint or does not match expectations."""


class JumpMatrixFile(NamedTuple):
    matrix: F2Matrix
    exponent: int


class Checkpoint(NamedTuple):
    matrix: F2Matrix
    exponent: int
    completed: int


def payload_nbytes(dim: int) -> int:
    return dim * _nwords(dim) * 8


def _write(path: PathLike, header: bytes, matrix: F2Matrix):
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(matrix.rows.astype("<u8", copy=False).tobytes())
    os.replace(tmp, path)


def _read(path: PathLike, extra: int):
    path = Path(path)
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size + extra)
        if len(raw) < _HEADER.size + extra:
            raise FormatError(f"{path}: truncated header")
        magic, version, dim, exponent, reserved = _HEADER.unpack_from(raw)
        if magic != MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise FormatError(f"{path}: unsupported version {version}")
        if dim == 0:
            raise FormatError(f"{path}: zero dimension")
        if reserved != 0:
            raise FormatError(f"{path}: reserved field is {reserved}, expected 0")
        expected = _HEADER.size + extra + payload_nbytes(dim)
        size = path.stat().st_size
        if size != expected:
            raise FormatError(f"{path}: size {size} bytes, header implies {expected}")
        rows = np.fromfile(fh, dtype="<u8").reshape(dim, _nwords(dim))
    try:
        matrix = F2Matrix(rows, dim)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    if not matrix.padding_ok():
        raise FormatError(f"{path}: nonzero padding bits")
    return matrix, exponent, raw[_HEADER.size:]


def write_jump_matrix(path: PathLike, matrix: F2Matrix, exponent: int):
    _write(path, _HEADER.pack(MAGIC, VERSION, matrix.dim, exponent, 0), matrix)


def read_jump_matrix(path: PathLike, *, dim: int | None = None, exponent: int | None = None) -> JumpMatrixFile:
    """Load a jump matrix, optionally insisting on its dimension/exponent."""
    matrix, q, _ = _read(path, 0)
    if dim is not None and matrix.dim != dim:
        raise FormatError(f"{path}: dimension {matrix.dim}, expected {dim}")
    if exponent is not None and q != exponent:
        raise FormatError(f"{path}: exponent {q}, expected {exponent}")
    return JumpMatrixFile(matrix, q)


def write_checkpoint(path: PathLike, matrix: F2Matrix, exponent: int, completed: int):
    header = _HEADER.pack(MAGIC, VERSION, matrix.dim, exponent, 0) + _COMPLETED.pack(completed)
    _write(path, header, matrix)


def read_checkpoint(path: PathLike) -> Checkpoint:
    matrix, q, extra = _read(path, _COMPLETED.size)
    (completed,) = _COMPLETED.unpack(extra)
    if completed > q:
        raise FormatError(f"{path}: {completed} squarings done but target exponent is {q}")
    return Checkpoint(matrix, q, completed)
