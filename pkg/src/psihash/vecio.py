"""File formats: packed hash files, CSV and raw-float64 vector inputs.

Hash file layout (integers little-endian):

    bytes 0-3    magic b"PSIH"
    bytes 4-7    uint32 format version (currently 1)
    bytes 8-11   uint32 k, bits per hash
    bytes 12-19  uint64 count, number of hashes
    then count rows of ceil(k/8) bytes each; bits are packed
    least-significant-first within each byte, bit value 1 encoding sign +1.

Vector inputs are either CSV (one comma-separated vector per line, no
header) or raw little-endian float64 rows with a JSON sidecar at
``<path>.json`` declaring ``{"n": ..., "count": ..., "dtype": "f64le"}``.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .pipeline import BinaryHash

MAGIC = b"PSIH"
VERSION = 1
_HEADER = struct.Struct("<4sIIQ")


class FormatError(ValueError):
    """A file does not match its declared format."""


def write_hashes(path, hashes: list[BinaryHash]) -> None:
    if not hashes:
        raise ValueError("refusing to write an empty hash file")
    k = hashes[0].k
    if any(h.k != k for h in hashes):
        raise ValueError("all hashes in a file must share one length")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, k, len(hashes)))
        for h in hashes:
            fh.write(h.tobytes())


def read_hashes(path) -> list[BinaryHash]:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, version, k, count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    row_bytes = (k + 7) // 8
    expected = _HEADER.size + row_bytes * count
    if len(data) != expected:
        raise FormatError(f"{path}: expected {expected} bytes, found {len(data)}")
    rows = np.frombuffer(data, dtype=np.uint8, offset=_HEADER.size).reshape(count, row_bytes)
    return [BinaryHash(k=k, packed=rows[i].copy()) for i in range(count)]


def read_vectors_csv(path, expect_n: int | None = None) -> np.ndarray:
    rows = []
    n = expect_n
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                values = [float(f) for f in line.split(",")]
            except ValueError as exc:
                raise FormatError(f"{path}: row {lineno}: {exc}") from exc
            if n is None:
                n = len(values)
            elif len(values) != n:
                raise FormatError(f"{path}: row {lineno}: expected {n} values, got {len(values)}")
            rows.append(values)
    if not rows:
        raise FormatError(f"{path}: no vectors found")
    return np.asarray(rows, dtype=np.float64)


def write_vectors_csv(path, vectors) -> None:
    arr = np.asarray(vectors, dtype=np.float64)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in arr:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def _sidecar_path(path) -> Path:
    return Path(str(path) + ".json")


def read_vectors_f64(path, expect_n: int | None = None) -> np.ndarray:
    sidecar = _sidecar_path(path)
    try:
        meta = json.loads(sidecar.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise FormatError(f"{path}: missing sidecar {sidecar}") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"{sidecar}: {exc}") from exc
    if meta.get("dtype") != "f64le":
        raise FormatError(f"{sidecar}: dtype must be 'f64le', got {meta.get('dtype')!r}")
    n, count = int(meta["n"]), int(meta["count"])
    if expect_n is not None and n != expect_n:
        raise FormatError(f"{sidecar}: declares n={n}, expected {expect_n}")
    data = np.fromfile(path, dtype="<f8")
    if data.size != n * count:
        raise FormatError(f"{path}: expected {n * count} float64 values, found {data.size}")
    return data.reshape(count, n)


def write_vectors_f64(path, vectors) -> None:
    arr = np.asarray(vectors, dtype="<f8")
    arr.tofile(path)
    meta = {"n": int(arr.shape[1]), "count": int(arr.shape[0]), "dtype": "f64le"}
    _sidecar_path(path).write_text(json.dumps(meta, sort_keys=True) + "\n", encoding="utf-8")


def read_vectors(path, expect_n: int | None = None) -> np.ndarray:
    """Dispatch on suffix: ``.csv`` is parsed as text, anything else as raw f64."""
    if str(path).endswith(".csv"):
        return read_vectors_csv(path, expect_n)
    return read_vectors_f64(path, expect_n)
