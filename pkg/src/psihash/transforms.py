"""Numerical kernels used by the hashing pipelines.

Fast paths (in-place butterfly Hadamard, FFT cyclic convolution) are paired
with dense oracles (`sylvester_hadamard`, `dense_matvec`, the `.dense()`
methods) that stay in the shipped library so the fast paths can be
cross-checked in the field, not only under test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonPowerOfTwoLength, RowCountExceedsDimension


def as_vector(x) -> np.ndarray:
    """Coerce to a nonempty 1-D float64 array with finite entries."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise DimensionMismatch(f"expected a nonempty 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


def as_signs(d) -> np.ndarray:
    """Coerce to a 1-D float64 array whose entries are exactly -1 or +1."""
    s = np.asarray(d, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise DimensionMismatch(f"expected a nonempty 1-D sign vector, got shape {s.shape}")
    if not np.all(np.abs(s) == 1.0):
        raise ValueError("diagonal entries must be exactly -1 or +1")
    return s


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def fwht_normalized(x) -> np.ndarray:
    """Multiply by the 1/sqrt(n)-scaled Sylvester Hadamard matrix in O(n log n).

    The scaled matrix is symmetric and orthogonal, so the transform is its own
    inverse and preserves the L2 norm.
    """
    v = as_vector(x)
    n = v.size
    if not is_power_of_two(n):
        raise NonPowerOfTwoLength(f"length {n} is not a power of two")
    y = v.copy()
    h = 1
    while h < n:
        y = y.reshape(-1, 2 * h)
        a = y[:, :h].copy()
        b = y[:, h:]
        y[:, :h] = a + b
        y[:, h:] = a - b
        h *= 2
    return y.reshape(n) / np.sqrt(n)


def sylvester_hadamard(n: int) -> np.ndarray:
    """Dense 1/sqrt(n)-scaled Sylvester Hadamard matrix (slow-path oracle)."""
    if not is_power_of_two(n):
        raise NonPowerOfTwoLength(f"order {n} is not a power of two")
    h = np.ones((1, 1))
    while h.shape[0] < n:
        h = np.block([[h, h], [h, -h]])
    return h / np.sqrt(n)


def apply_diagonal(d, x) -> np.ndarray:
    """Multiply elementwise by a +-1 diagonal; preserves the L2 norm exactly."""
    s = as_signs(d)
    v = as_vector(x)
    if s.size != v.size:
        raise DimensionMismatch(f"diagonal length {s.size} != vector length {v.size}")
    return s * v


@dataclass(frozen=True, eq=False)
class CirculantSpec:
    """n x n circulant matrix given by its first row.

    Dense form: M[i][j] = first_row[(j - i) mod n]; every row is the previous
    row cyclically shifted one position to the right.
    """

    first_row: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "first_row", as_vector(self.first_row))

    @property
    def n(self) -> int:
        return self.first_row.size

    def dense(self) -> np.ndarray:
        n = self.n
        idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
        return self.first_row[idx]


@dataclass(frozen=True, eq=False)
class ToeplitzSpec:
    """Toeplitz matrix given by its 2n-1 diagonals.

    ``diagonals[o + n - 1]`` is the constant value on offset o = j - i, for
    o in [-(n-1), n-1]. Dense form: M[i][j] = diagonals[j - i + n - 1].
    """

    diagonals: np.ndarray

    def __post_init__(self):
        d = as_vector(self.diagonals)
        if d.size % 2 == 0:
            raise DimensionMismatch(f"diagonal count must be odd (2n-1), got {d.size}")
        object.__setattr__(self, "diagonals", d)

    @property
    def n(self) -> int:
        return (self.diagonals.size + 1) // 2

    def dense(self, k: int) -> np.ndarray:
        n = self.n
        if not 1 <= k <= n:
            raise RowCountExceedsDimension(f"row count {k} not in [1, {n}]")
        idx = np.arange(n)[None, :] - np.arange(k)[:, None] + (n - 1)
        return self.diagonals[idx]


def circulant_matvec(c: CirculantSpec, x) -> np.ndarray:
    """Circulant matrix-vector product via length-n cyclic convolution."""
    v = as_vector(x)
    if c.n != v.size:
        raise DimensionMismatch(f"circulant order {c.n} != vector length {v.size}")
    # first column of the matrix; the product is then first_col (*) x
    col = np.roll(c.first_row[::-1], 1)
    return np.fft.irfft(np.fft.rfft(col) * np.fft.rfft(v), v.size)


def toeplitz_matvec(t: ToeplitzSpec, x, k: int) -> np.ndarray:
    """First k rows of a Toeplitz product, via embedding in a 2n-circulant."""
    v = as_vector(x)
    n = v.size
    if t.n != n:
        raise DimensionMismatch(f"Toeplitz order {t.n} != vector length {n}")
    if not 1 <= k <= n:
        raise RowCountExceedsDimension(f"row count {k} not in [1, {n}]")
    d = t.diagonals
    col = np.zeros(2 * n)
    col[:n] = d[n - 1 :: -1]
    col[n + 1 :] = d[: n - 1 : -1]
    padded = np.zeros(2 * n)
    padded[:n] = v
    y = np.fft.irfft(np.fft.rfft(col) * np.fft.rfft(padded), 2 * n)
    return y[:k]


def dense_matvec(m, x) -> np.ndarray:
    """Textbook dense matrix-vector product; the oracle the fast paths answer to."""
    a = np.asarray(m, dtype=np.float64)
    v = as_vector(x)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {a.shape}")
    if a.shape[1] != v.size:
        raise DimensionMismatch(f"matrix has {a.shape[1]} columns, vector has {v.size}")
    return a @ v
