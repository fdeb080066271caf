"""Pool-backed structured gaussian projection matrices.

A k x n projection matrix is assembled from a shared pool of t i.i.d.
standard gaussians: entry (i, j) is the sum of the pool values selected by a
subset S[i][j] of {1, ..., t}. The defining constraints are

  * k <= n <= t <= k*n,
  * all subsets within a row have the same cardinality,
  * subsets within a row are pairwise disjoint,
  * within any single column, a pool index recurs at most ``psi`` times
    (class 0 meaning at most once).

Toeplitz and circulant matrices are the singleton-subset special cases: one
pool gaussian per diagonal (respectively per cyclic offset), which puts both
in multiplicity class 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch, InvalidStructure, RowCountExceedsDimension
from .transforms import CirculantSpec, ToeplitzSpec, as_vector, circulant_matvec, toeplitz_matvec

TOEPLITZ = "toeplitz"
CIRCULANT = "circulant"
GENERAL = "general"


@dataclass(frozen=True, eq=False)
class GaussianPool:
    """The t shared standard-gaussian scalars backing every matrix entry.

    ``draw`` with the same seed reproduces the pool bit-for-bit.
    """

    seed: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size < 1:
            raise ValueError(f"pool must be a nonempty 1-D array, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("pool values must be finite")
        object.__setattr__(self, "values", v)

    @classmethod
    def draw(cls, t: int, seed) -> "GaussianPool":
        if t < 1:
            raise ValueError(f"pool size must be >= 1, got {t}")
        values = np.random.default_rng(seed).standard_normal(t)
        return cls(seed=seed, values=values)

    @property
    def t(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class SubsetStructure:
    """Index subsets S[i][j] describing which pool values feed each entry.

    ``subsets[i][j]`` holds 1-based pool indices for entry (i+1, j+1); shape
    and index-range are enforced here, the four defining constraints are
    checked by :func:`validate` (report-style, so deliberately broken
    structures can be inspected).
    """

    k: int
    n: int
    t: int
    psi: int
    subsets: tuple[tuple[frozenset[int], ...], ...]

    def __post_init__(self):
        if self.k < 1 or self.n < 1 or self.t < 1:
            raise ValueError("k, n and t must all be >= 1")
        if self.psi < 0:
            raise ValueError(f"psi must be >= 0, got {self.psi}")
        rows = tuple(tuple(frozenset(int(l) for l in s) for s in row) for row in self.subsets)
        if len(rows) != self.k or any(len(row) != self.n for row in rows):
            raise ValueError(f"subsets must form a {self.k} x {self.n} grid")
        for row in rows:
            for s in row:
                for l in s:
                    if not 1 <= l <= self.t:
                        raise ValueError(f"pool index {l} outside [1, {self.t}]")
        object.__setattr__(self, "subsets", rows)


@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    """Pass/fail per defining constraint, plus the multiplicity class.

    ``psi_class`` is the smallest class the structure actually satisfies:
    0 when no pool index recurs within a column, otherwise the maximum
    per-column multiplicity.
    """

    checks: tuple[ConstraintCheck, ...]
    psi_class: int

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.checks if not c.passed)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "psi_class": self.psi_class,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks
            ],
        }


def validate(structure: SubsetStructure) -> ValidationReport:
    """Check the four defining constraints, reporting the first violation of each."""
    k, n, t = structure.k, structure.n, structure.t

    if not k <= n:
        dim = ConstraintCheck("dimension_ordering", False, f"k={k} > n={n}")
    elif not n <= t:
        dim = ConstraintCheck("dimension_ordering", False, f"n={n} > t={t}")
    elif not t <= k * n:
        dim = ConstraintCheck("dimension_ordering", False, f"t={t} > k*n={k * n}")
    else:
        dim = ConstraintCheck("dimension_ordering", True)

    card = ConstraintCheck("row_cardinality", True)
    for i, row in enumerate(structure.subsets):
        sizes = {len(s) for s in row}
        if len(sizes) > 1:
            j = next(j for j, s in enumerate(row) if len(s) != len(row[0]))
            card = ConstraintCheck(
                "row_cardinality", False, f"row {i + 1}: |S[{i + 1}][{j + 1}]| != |S[{i + 1}][1]|"
            )
            break

    disjoint = ConstraintCheck("row_disjoint", True)
    for i, row in enumerate(structure.subsets):
        seen: dict[int, int] = {}
        for j, s in enumerate(row):
            for l in s:
                if l in seen:
                    disjoint = ConstraintCheck(
                        "row_disjoint",
                        False,
                        f"row {i + 1}: pool index {l} in columns {seen[l] + 1} and {j + 1}",
                    )
                    break
                seen[l] = j
            if not disjoint.passed:
                break
        if not disjoint.passed:
            break

    # column scan: multiplicity of each pool index within each column
    bound = max(structure.psi, 1)
    max_mult = 0
    mult = ConstraintCheck("column_multiplicity", True)
    for j in range(n):
        counts: dict[int, int] = {}
        for i in range(k):
            for l in structure.subsets[i][j]:
                counts[l] = counts.get(l, 0) + 1
        for l, c in counts.items():
            if c > max_mult:
                max_mult = c
            if c > bound and mult.passed:
                mult = ConstraintCheck(
                    "column_multiplicity",
                    False,
                    f"column {j + 1}: pool index {l} appears {c} times (bound {bound})",
                )
    psi_class = 0 if max_mult <= 1 else max_mult
    return ValidationReport(checks=(dim, card, disjoint, mult), psi_class=psi_class)


def _toeplitz_subsets(k: int, n: int) -> SubsetStructure:
    # S[i][j] = {i - j + n} (1-based): one pool index per diagonal
    subsets = tuple(
        tuple(frozenset((i - j + n,)) for j in range(1, n + 1)) for i in range(1, k + 1)
    )
    return SubsetStructure(k=k, n=n, t=n + k - 1, psi=0, subsets=subsets)


def _circulant_subsets(k: int, n: int) -> SubsetStructure:
    # S[i][j] = {((j - i) mod n) + 1}: one pool index per cyclic offset
    subsets = tuple(
        tuple(frozenset((((j - i) % n) + 1,)) for j in range(1, n + 1)) for i in range(1, k + 1)
    )
    return SubsetStructure(k=k, n=n, t=n, psi=0, subsets=subsets)


def family_structure(family: str, k: int, n: int) -> SubsetStructure:
    """The subset structure a family constructor would produce (no pool needed)."""
    if family == TOEPLITZ:
        return _toeplitz_subsets(k, n)
    if family == CIRCULANT:
        return _circulant_subsets(k, n)
    raise ValueError(f"no implied structure for family {family!r}")


@dataclass(frozen=True, eq=False, repr=False)
class PsiRegularMatrix:
    """A structured projection matrix: subset structure plus gaussian pool.

    For the toeplitz/circulant families the explicit subset grid is built
    lazily (it is only needed for validation, serialization and dependency
    graphs); hashing goes through vectorized fast paths keyed on ``family``.
    """

    family: str
    k: int
    n: int
    pool: GaussianPool
    explicit: SubsetStructure | None = field(default=None)

    def __post_init__(self):
        if self.family not in (TOEPLITZ, CIRCULANT, GENERAL):
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == GENERAL and self.explicit is None:
            raise ValueError("general matrices need an explicit SubsetStructure")
        expected_t = {
            TOEPLITZ: self.n + self.k - 1,
            CIRCULANT: self.n,
            GENERAL: self.explicit.t if self.explicit is not None else None,
        }[self.family]
        if self.pool.t != expected_t:
            raise DimensionMismatch(f"pool size {self.pool.t}, structure needs {expected_t}")

    def __repr__(self):
        return f"PsiRegularMatrix(family={self.family!r}, k={self.k}, n={self.n}, t={self.t})"

    @property
    def t(self) -> int:
        return self.pool.t

    @cached_property
    def structure(self) -> SubsetStructure:
        if self.explicit is not None:
            return self.explicit
        return family_structure(self.family, self.k, self.n)

    @property
    def row_sigma(self) -> tuple[int, ...]:
        """Per-row subset cardinality; also the variance of each entry in that row."""
        if self.family in (TOEPLITZ, CIRCULANT):
            return (1,) * self.k
        return tuple(len(row[0]) for row in self.structure.subsets)

    def materialize(self) -> np.ndarray:
        """Dense k x n form with exact per-entry subset sums (slow path / oracle)."""
        g = self.pool.values
        if self.family == TOEPLITZ:
            idx = np.arange(self.k)[:, None] - np.arange(self.n)[None, :] + (self.n - 1)
            return g[idx]
        if self.family == CIRCULANT:
            idx = (np.arange(self.n)[None, :] - np.arange(self.k)[:, None]) % self.n
            return g[idx]
        out = np.zeros((self.k, self.n))
        for i, row in enumerate(self.structure.subsets):
            for j, s in enumerate(row):
                if s:
                    out[i, j] = g[np.fromiter(sorted(s), dtype=np.intp) - 1].sum()
        return out

    def matvec(self, x) -> np.ndarray:
        """Product with x, dispatching to the FFT fast path when structured."""
        v = as_vector(x)
        if v.size != self.n:
            raise DimensionMismatch(f"matrix has {self.n} columns, vector has {v.size}")
        g = self.pool.values
        if self.family == TOEPLITZ:
            diagonals = np.zeros(2 * self.n - 1)
            diagonals[self.n - self.k :] = g[::-1]
            return toeplitz_matvec(ToeplitzSpec(diagonals), v, self.k)
        if self.family == CIRCULANT:
            return circulant_matvec(CirculantSpec(g), v)[: self.k]
        return self.materialize() @ v


def make_toeplitz(k: int, n: int, seed) -> PsiRegularMatrix:
    """k x n Toeplitz matrix: constant diagonals, one pool gaussian each."""
    if not 1 <= k <= n:
        raise RowCountExceedsDimension(f"need 1 <= k <= n, got k={k}, n={n}")
    return PsiRegularMatrix(family=TOEPLITZ, k=k, n=n, pool=GaussianPool.draw(n + k - 1, seed))


def make_circulant(k: int, n: int, seed) -> PsiRegularMatrix:
    """First k rows of an n x n circulant: each row a one-step cyclic shift."""
    if not 1 <= k <= n:
        raise RowCountExceedsDimension(f"need 1 <= k <= n, got k={k}, n={n}")
    return PsiRegularMatrix(family=CIRCULANT, k=k, n=n, pool=GaussianPool.draw(n, seed))


def make_general(k: int, n: int, t: int, subsets, seed, psi: int | None = None) -> PsiRegularMatrix:
    """Matrix from an explicit subset grid; rejects structures that fail validation.

    ``psi`` defaults to the smallest multiplicity class the grid satisfies.
    """
    structure = SubsetStructure(k=k, n=n, t=t, psi=0 if psi is None else psi, subsets=subsets)
    report = validate(structure)
    if psi is None and report.psi_class != structure.psi:
        structure = SubsetStructure(k=k, n=n, t=t, psi=report.psi_class, subsets=structure.subsets)
        report = validate(structure)
    if not report.passed:
        raise InvalidStructure(f"structure fails: {', '.join(report.failed())}", report=report)
    return PsiRegularMatrix(
        family=GENERAL, k=k, n=n, pool=GaussianPool.draw(t, seed), explicit=structure
    )


def structure_to_dict(structure: SubsetStructure) -> dict:
    """JSON-ready form: subsets as a flat row-major list of sorted index lists."""
    return {
        "k": structure.k,
        "n": structure.n,
        "t": structure.t,
        "psi": structure.psi,
        "subsets": [sorted(s) for row in structure.subsets for s in row],
    }


def structure_from_dict(doc: dict) -> SubsetStructure:
    k, n = int(doc["k"]), int(doc["n"])
    flat = doc["subsets"]
    if len(flat) != k * n:
        raise ValueError(f"expected {k * n} subsets (row-major), got {len(flat)}")
    rows = tuple(tuple(frozenset(flat[i * n + j]) for j in range(n)) for i in range(k))
    return SubsetStructure(k=k, n=n, t=int(doc["t"]), psi=int(doc["psi"]), subsets=rows)


def matrix_to_dict(m: PsiRegularMatrix) -> dict:
    """Reproducible form: full structure plus the pool seed (values regenerated)."""
    return {
        "family": m.family,
        "structure": structure_to_dict(m.structure),
        "pool": {"seed": m.pool.seed},
    }


def matrix_from_dict(doc: dict) -> PsiRegularMatrix:
    structure = structure_from_dict(doc["structure"])
    family = doc.get("family", GENERAL)
    pool = GaussianPool.draw(structure.t, doc["pool"]["seed"])
    explicit = structure if family == GENERAL else None
    return PsiRegularMatrix(
        family=family, k=structure.k, n=structure.n, pool=pool, explicit=explicit
    )
