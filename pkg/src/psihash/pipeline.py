"""Sign-projection hashing pipelines and the normalized angle estimator.

Two variants share the same back end (a +-1 diagonal, a structured gaussian
projection, a pointwise quantizer):

  * ``extended`` first multiplies by another +-1 diagonal and a normalized
    Hadamard matrix, which flattens coordinates without changing any pairwise
    angle; inputs are zero-padded to the next power of two.
  * ``short`` skips the Hadamard front end entirely and keeps the input
    dimension as is.

With the sign quantizer the hash is a k-bit vector, and the fraction of
differing bits between two hashes estimates angle/pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .structured import (
    GENERAL,
    PsiRegularMatrix,
    SubsetStructure,
    make_circulant,
    make_general,
    make_toeplitz,
)
from .transforms import apply_diagonal, as_vector, fwht_normalized

EXTENDED = "extended"
SHORT = "short"


def next_pow_two(n: int) -> int:
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    return 1 << (n - 1).bit_length()


def normalize(x) -> np.ndarray:
    """Scale to unit L2 norm (hashing itself is scale-invariant; the angle
    estimator's semantics assume unit inputs)."""
    v = as_vector(x)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return v / norm


@dataclass(frozen=True)
class Quantizer:
    """Pointwise map from projections to hash coordinates.

    All kinds tend to +1 for large positive inputs and -1 for large negative
    ones. ``sign`` and ``threshold`` are binary (with sign(0) = +1 so results
    are deterministic); ``tanh`` produces real coordinates in (-1, 1).
    """

    kind: str
    beta: float | None = None
    cutoff: float | None = None

    @classmethod
    def sign(cls) -> "Quantizer":
        return cls(kind="sign")

    @classmethod
    def scaled_tanh(cls, beta: float) -> "Quantizer":
        if beta <= 0:
            raise ValueError(f"tanh scale must be positive, got {beta}")
        return cls(kind="tanh", beta=float(beta))

    @classmethod
    def step_at(cls, cutoff: float) -> "Quantizer":
        return cls(kind="threshold", cutoff=float(cutoff))

    @classmethod
    def from_spec(cls, spec: str) -> "Quantizer":
        """Parse "sign", "tanh:BETA" or "threshold:CUTOFF"."""
        if spec == "sign":
            return cls.sign()
        head, sep, arg = spec.partition(":")
        if sep:
            if head == "tanh":
                return cls.scaled_tanh(float(arg))
            if head == "threshold":
                return cls.step_at(float(arg))
        raise ValueError(f"unknown quantizer spec {spec!r}")

    def to_spec(self) -> str:
        if self.kind == "sign":
            return "sign"
        if self.kind == "tanh":
            return f"tanh:{self.beta!r}"
        return f"threshold:{self.cutoff!r}"

    @property
    def binary(self) -> bool:
        return self.kind in ("sign", "threshold")

    def apply(self, z: np.ndarray) -> np.ndarray:
        if self.kind == "sign":
            return np.where(z >= 0.0, 1.0, -1.0)
        if self.kind == "threshold":
            return np.where(z >= self.cutoff, 1.0, -1.0)
        if self.kind == "tanh":
            return np.tanh(self.beta * z)
        raise ValueError(f"unknown quantizer kind {self.kind!r}")


@dataclass(frozen=True, eq=False)
class BinaryHash:
    """k sign bits, bit-packed little-endian (bit 1 encodes +1)."""

    k: int
    packed: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.packed, dtype=np.uint8)
        if self.k < 1 or p.shape != ((self.k + 7) // 8,):
            raise DimensionMismatch(f"packed shape {p.shape} does not hold {self.k} bits")
        object.__setattr__(self, "packed", p)

    @classmethod
    def from_signs(cls, signs) -> "BinaryHash":
        s = np.asarray(signs, dtype=np.float64)
        if s.ndim != 1 or s.size == 0 or not np.all(np.abs(s) == 1.0):
            raise ValueError("sign hash coordinates must be exactly -1 or +1")
        return cls(k=s.size, packed=np.packbits(s > 0, bitorder="little"))

    def to_signs(self) -> np.ndarray:
        bits = np.unpackbits(self.packed, count=self.k, bitorder="little")
        return bits.astype(np.float64) * 2.0 - 1.0

    def hamming(self, other: "BinaryHash") -> int:
        if self.k != other.k:
            raise DimensionMismatch(f"hash lengths differ: {self.k} != {other.k}")
        return int(np.unpackbits(np.bitwise_xor(self.packed, other.packed)).sum())

    def tobytes(self) -> bytes:
        return self.packed.tobytes()

    def __eq__(self, other):
        if not isinstance(other, BinaryHash):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.packed, other.packed)


@dataclass(frozen=True, eq=False)
class RealHash:
    """Real-valued hash from a smooth quantizer; compared by literal L1 distance."""

    k: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.k,):
            raise DimensionMismatch(f"values shape {v.shape} != ({self.k},)")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class AngleEstimate:
    """Estimated angle divided by pi, always in [0, 1]."""

    value: float
    k: int

    @property
    def radians(self) -> float:
        return math.pi * self.value


@dataclass(frozen=True)
class PipelineConfig:
    variant: str  # "extended" | "short"
    family: str  # "toeplitz" | "circulant" | "general"
    k: int
    n: int
    seed: int
    quantizer: Quantizer = Quantizer.sign()
    subsets: SubsetStructure | None = None  # required for the general family


@dataclass(frozen=True, eq=False)
class HashPipeline:
    """A fully configured hashing transform; immutable and safely shareable.

    All randomness (pool, both diagonals) derives from the single seed, so
    (seed, config, x) -> hash is a pure function.
    """

    variant: str
    n_input: int
    n_padded: int
    k: int
    r_signs: np.ndarray | None
    d_signs: np.ndarray
    matrix: PsiRegularMatrix
    quantizer: Quantizer
    seed: int

    def project(self, x) -> np.ndarray:
        """The pre-quantizer projection of x into R^k."""
        v = as_vector(x)
        if v.size != self.n_input:
            raise DimensionMismatch(f"pipeline takes length {self.n_input}, got {v.size}")
        if self.variant == EXTENDED:
            y = np.zeros(self.n_padded)
            y[: self.n_input] = v
            y = fwht_normalized(apply_diagonal(self.r_signs, y))
        else:
            y = v
        return self.matrix.matvec(apply_diagonal(self.d_signs, y))

    def hash(self, x) -> BinaryHash | RealHash:
        out = self.quantizer.apply(self.project(x))
        if self.quantizer.binary:
            return BinaryHash.from_signs(out)
        return RealHash(k=self.k, values=out)

    def hash_batch(self, xs) -> list[BinaryHash | RealHash]:
        hashes = []
        for row, x in enumerate(xs):
            try:
                hashes.append(self.hash(x))
            except DimensionMismatch as exc:
                raise DimensionMismatch(f"row {row}: {exc}") from exc
        return hashes


def _spawn_seeds(seed: int):
    pool_ss, r_ss, d_ss = np.random.SeedSequence(seed).spawn(3)
    pool_seed = int(pool_ss.generate_state(1, np.uint64)[0])
    return pool_seed, r_ss, d_ss


def _draw_signs(ss, n: int) -> np.ndarray:
    return np.random.default_rng(ss).integers(0, 2, n).astype(np.float64) * 2.0 - 1.0


def build_pipeline(config: PipelineConfig) -> HashPipeline:
    """Materialize a pipeline from its config; same config+seed, same hashes."""
    if config.variant not in (EXTENDED, SHORT):
        raise ValueError(f"unknown variant {config.variant!r}")
    n_padded = next_pow_two(config.n) if config.variant == EXTENDED else config.n
    pool_seed, r_ss, d_ss = _spawn_seeds(config.seed)

    if config.family == "toeplitz":
        matrix = make_toeplitz(config.k, n_padded, pool_seed)
    elif config.family == "circulant":
        matrix = make_circulant(config.k, n_padded, pool_seed)
    elif config.family == GENERAL:
        s = config.subsets
        if s is None:
            raise ValueError("general family needs explicit subsets")
        if s.n != n_padded or s.k != config.k:
            raise DimensionMismatch(
                f"structure is {s.k} x {s.n}, pipeline needs {config.k} x {n_padded}"
            )
        subsets = tuple(tuple(sorted(s_ij) for s_ij in row) for row in s.subsets)
        matrix = make_general(s.k, s.n, s.t, subsets, pool_seed, psi=s.psi)
    else:
        raise ValueError(f"unknown family {config.family!r}")

    r_signs = _draw_signs(r_ss, n_padded) if config.variant == EXTENDED else None
    d_signs = _draw_signs(d_ss, n_padded)
    return HashPipeline(
        variant=config.variant,
        n_input=config.n,
        n_padded=n_padded,
        k=config.k,
        r_signs=r_signs,
        d_signs=d_signs,
        matrix=matrix,
        quantizer=config.quantizer,
        seed=config.seed,
    )


def estimate_angle(h1, h2) -> AngleEstimate:
    """Normalized angle estimate: L1 distance over 2k, i.e. angle/pi.

    For sign hashes this is exactly the Hamming fraction.
    """
    if isinstance(h1, BinaryHash) and isinstance(h2, BinaryHash):
        return AngleEstimate(value=h1.hamming(h2) / h1.k, k=h1.k)
    if isinstance(h1, RealHash) and isinstance(h2, RealHash):
        if h1.k != h2.k:
            raise DimensionMismatch(f"hash lengths differ: {h1.k} != {h2.k}")
        return AngleEstimate(
            value=float(np.abs(h1.values - h2.values).sum() / (2 * h1.k)), k=h1.k
        )
    raise TypeError("cannot compare a binary hash with a real-valued hash")


def estimate_angle_radians(h1, h2) -> float:
    """Angle estimate in radians (pi times the normalized estimate)."""
    return estimate_angle(h1, h2).radians
