"""Matrix and label files.

Two matrix layouts are supported:

* CSV: one row per line, comma separated, no header.  Floats are written
  with shortest round-trip repr, so save/load is bit-exact and output files
  are byte-stable across runs.
* UDMX binary: a 16-byte little-endian header (magic ``b"UDMX"``, uint32 row
  count, uint32 column count, 4 reserved zero bytes) followed by float64
  row-major data.

Label sidecars are CSV with one ``label,time`` pair per sample.
"""

import struct

import numpy as np

from .errors import DataError
from .linalg import as_matrix

MAGIC = b"UDMX"
_HEADER = struct.Struct("<4sIII")  # magic, n, d, reserved


def save_matrix_csv(path, a) -> None:
    A = as_matrix(a)
    with open(path, "w", newline="\n") as fh:
        for row in A:
            fh.write(",".join(repr(x) for x in row.tolist()))
            fh.write("\n")


def load_matrix_csv(path) -> np.ndarray:
    try:
        arr = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    except ValueError as exc:
        raise DataError(f"cannot parse matrix CSV {path}: {exc}") from exc
    if arr.size == 0:
        raise DataError(f"matrix CSV {path} is empty")
    return as_matrix(arr, f"matrix from {path}")


def save_matrix_binary(path, a) -> None:
    A = as_matrix(a)
    n, d = A.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, n, d, 0))
        fh.write(np.ascontiguousarray(A, dtype="<f8").tobytes())


def load_matrix_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise DataError(f"{path}: truncated header")
        magic, n, d, _reserved = _HEADER.unpack(header)
        if magic != MAGIC:
            raise DataError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        payload = fh.read()
    expected = 8 * n * d
    if len(payload) != expected:
        raise DataError(
            f"{path}: payload has {len(payload)} bytes, expected {expected}"
        )
    arr = np.frombuffer(payload, dtype="<f8").reshape(n, d).astype(float)
    return as_matrix(arr, f"matrix from {path}")


def save_labels_csv(path, labels, times=None) -> None:
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise DataError("labels must be 1-D")
    if times is None:
        rows = (str(int(v)) for v in labels)
    else:
        times = np.asarray(times, dtype=float)
        if times.shape != labels.shape:
            raise DataError("times must match labels in length")
        rows = (
            f"{int(v)},{repr(t)}" for v, t in zip(labels.tolist(), times.tolist())
        )
    with open(path, "w", newline="\n") as fh:
        for row in rows:
            fh.write(row)
            fh.write("\n")


def load_labels_csv(path):
    """Return (labels, times); times is None when the file has one column."""
    raw = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    if raw.size == 0:
        raise DataError(f"labels CSV {path} is empty")
    labels = raw[:, 0].astype(int)
    times = raw[:, 1].astype(float) if raw.shape[1] > 1 else None
    return labels, times
