"""Little-endian binary tensor files.

Layout::

    offset  size        field
    0       4           magic b"DAI6"
    4       2           version (uint16, = 1)
    6       2           dtype code (uint16)
    8       4           ndims (uint32)
    12      8 * ndims   dims (uint64 each)
    ...                 payload, row-major

dtype 1 is complex128 stored as interleaved (re, im) binary64 pairs, 16 bytes
per entry. dtype 2 is float64 and dtype 3 is int64, both 8 bytes per entry.
"""

from __future__ import annotations

import hashlib
import struct
from pathlib import Path
from typing import Union

import numpy as np

MAGIC = b"DAI6"
VERSION = 1

DTYPES = {1: np.dtype("<c16"), 2: np.dtype("<f8"), 3: np.dtype("<i8")}
DTYPE_NAMES = {1: "complex128", 2: "float64", 3: "int64"}
_CODES = {v: k for k, v in DTYPES.items()}


class TensorFormatError(ValueError):
    pass


def _code_for(arr: np.ndarray) -> int:
    if np.iscomplexobj(arr):
        return 1
    if np.issubdtype(arr.dtype, np.integer):
        return 3
    if np.issubdtype(arr.dtype, np.floating):
        return 2
    raise TypeError(f"unsupported dtype {arr.dtype}")


def encode(arr) -> bytes:
    arr = np.asarray(arr)
    code = _code_for(arr)
    data = np.asarray(arr, dtype=DTYPES[code])
    head = struct.pack("<4sHHI", MAGIC, VERSION, code, data.ndim)
    head += struct.pack(f"<{data.ndim}Q", *data.shape)
    return head + data.tobytes(order="C")


def decode(buf: bytes) -> np.ndarray:
    if len(buf) < 12:
        raise TensorFormatError("truncated header")
    magic, version, code, ndim = struct.unpack_from("<4sHHI", buf, 0)
    if magic != MAGIC:
        raise TensorFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise TensorFormatError(f"unsupported version {version}")
    if code not in DTYPES:
        raise TensorFormatError(f"unknown dtype code {code}")
    off = 12 + 8 * ndim
    if len(buf) < off:
        raise TensorFormatError("truncated dims")
    dims = struct.unpack_from(f"<{ndim}Q", buf, 12)
    dt = DTYPES[code]
    expected = dt.itemsize * int(np.prod(dims, dtype=np.int64))
    if len(buf) - off != expected:
        raise TensorFormatError(f"payload is {len(buf) - off} bytes, dims {dims} need {expected}")
    return np.frombuffer(buf, dtype=dt, offset=off).reshape(dims).copy()


def write_tensor(path: Union[str, Path], arr) -> str:
    """Write ``arr`` and return the sha256 hex digest of the file bytes."""
    data = encode(arr)
    Path(path).write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def read_tensor(path: Union[str, Path]) -> np.ndarray:
    return decode(Path(path).read_bytes())
