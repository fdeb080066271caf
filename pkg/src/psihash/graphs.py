"""Dependency graphs between rows of a structured projection matrix.

For a fixed pair of rows (k1, k2), the graph has a vertex for every unordered
column pair {j1, j2} (j1 != j2) whose subsets share a pool index across the
two rows, and an edge between vertices that share a column. The maximum
chromatic number over all row pairs measures how far the rows are from
independent; for Toeplitz and circulant matrices every such graph is a
disjoint union of paths and cycles, so the maximum is at most 3.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .errors import GraphTooLargeForExact, RowIndexOutOfRange, RowsNotDistinct
from .structured import PsiRegularMatrix, SubsetStructure

Vertex = tuple[int, int]


@dataclass(frozen=True, eq=False)
class DependencyGraph:
    """Vertices are sorted column pairs, edges index into ``vertices``."""

    row_pair: tuple[int, int]
    vertices: tuple[Vertex, ...]
    edges: tuple[tuple[int, int], ...]

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    def adjacency(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in self.vertices]
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj


@dataclass(frozen=True)
class ChromaticResult:
    """A coloring outcome; the witness is always verified proper before return."""

    value: int
    method: str  # "exact" | "greedy-upper-bound"
    witness_coloring: dict[Vertex, int]


@dataclass(frozen=True)
class PChromaticResult:
    """Maximum chromatic number over all row pairs of a matrix."""

    value: int
    method: str
    argmax_pair: tuple[int, int] | None
    per_pair: tuple[tuple[int, int, int], ...]  # (k1, k2, chi)
    witness_coloring: dict[Vertex, int]

    def to_dict(self) -> dict:
        return {
            "chi": self.value,
            "method": self.method,
            "argmax_pair": list(self.argmax_pair) if self.argmax_pair else None,
            "per_pair": [{"k1": a, "k2": b, "chi": c} for a, b, c in self.per_pair],
        }


def _as_structure(m) -> SubsetStructure:
    return m.structure if isinstance(m, PsiRegularMatrix) else m


def build_graph(m, k1: int, k2: int) -> DependencyGraph:
    """Dependency graph for rows k1 < k2 (1-based); accepts a matrix or structure.

    Reversed row order is normalized by swapping (the graph is symmetric in
    the two rows).
    """
    s = _as_structure(m)
    for r in (k1, k2):
        if not 1 <= r <= s.k:
            raise RowIndexOutOfRange(f"row {r} outside [1, {s.k}]")
    if k1 == k2:
        raise RowsNotDistinct(f"row pair needs two distinct rows, got ({k1}, {k2})")
    if k1 > k2:
        k1, k2 = k2, k1

    # within a row every pool index sits in at most one column (for valid
    # structures); keep lists so broken structures still get a correct graph
    cols1: dict[int, list[int]] = {}
    cols2: dict[int, list[int]] = {}
    for j in range(s.n):
        for l in s.subsets[k1 - 1][j]:
            cols1.setdefault(l, []).append(j + 1)
        for l in s.subsets[k2 - 1][j]:
            cols2.setdefault(l, []).append(j + 1)

    vertex_set: set[Vertex] = set()
    for l, js in cols1.items():
        others = cols2.get(l)
        if not others:
            continue
        for a in js:
            for b in others:
                if a != b:
                    vertex_set.add((a, b) if a < b else (b, a))

    vertices = tuple(sorted(vertex_set))
    index = {v: i for i, v in enumerate(vertices)}
    by_column: dict[int, list[int]] = {}
    for v in vertices:
        for col in v:
            by_column.setdefault(col, []).append(index[v])
    edge_set: set[tuple[int, int]] = set()
    for members in by_column.values():
        for a, b in combinations(members, 2):
            edge_set.add((a, b) if a < b else (b, a))
    return DependencyGraph(row_pair=(k1, k2), vertices=vertices, edges=tuple(sorted(edge_set)))


def _dsatur(adj: list[set[int]]) -> list[int]:
    """DSATUR greedy coloring; ties broken by higher degree, then lowest id."""
    nv = len(adj)
    colors = [-1] * nv
    neighbor_colors: list[set[int]] = [set() for _ in range(nv)]
    degrees = [len(a) for a in adj]
    for _ in range(nv):
        v = max(
            (u for u in range(nv) if colors[u] == -1),
            key=lambda u: (len(neighbor_colors[u]), degrees[u], -u),
        )
        c = 0
        while c in neighbor_colors[v]:
            c += 1
        colors[v] = c
        for u in adj[v]:
            neighbor_colors[u].add(c)
    return colors


def _greedy_clique(adj: list[set[int]]) -> int:
    """Lower bound: grow a clique greedily from each high-degree vertex."""
    nv = len(adj)
    best = 1 if nv else 0
    order = sorted(range(nv), key=lambda u: -len(adj[u]))
    for start in order[:8]:
        clique = [start]
        for u in order:
            if u != start and all(u in adj[w] for w in clique):
                clique.append(u)
        best = max(best, len(clique))
    return best


def _colorable(adj: list[set[int]], q: int) -> list[int] | None:
    """Backtracking q-colorability over a degree-descending vertex order."""
    nv = len(adj)
    order = sorted(range(nv), key=lambda u: -len(adj[u]))
    colors = [-1] * nv

    def assign(pos: int, used: int) -> bool:
        if pos == nv:
            return True
        v = order[pos]
        forbidden = {colors[u] for u in adj[v] if colors[u] != -1}
        limit = min(q, used + 1)  # symmetry breaking: at most one fresh color
        for c in range(limit):
            if c not in forbidden:
                colors[v] = c
                if assign(pos + 1, max(used, c + 1)):
                    return True
                colors[v] = -1
        return False

    return colors if assign(0, 0) else None


def _verify_proper(adj: list[set[int]], colors: list[int]) -> None:
    for v, nbrs in enumerate(adj):
        for u in nbrs:
            if colors[v] == colors[u]:
                raise AssertionError(f"improper coloring: vertices {v} and {u} share a color")


def chromatic_number(g: DependencyGraph, mode: str = "exact", exact_cap: int = 24) -> ChromaticResult:
    """Chromatic number of a dependency graph.

    ``exact`` runs iterative-deepening backtracking between a greedy-clique
    lower bound and the DSATUR upper bound and is refused above ``exact_cap``
    vertices; ``greedy`` returns the DSATUR upper bound. The empty graph has
    value 0 by convention.
    """
    if mode not in ("exact", "greedy"):
        raise ValueError(f"mode must be 'exact' or 'greedy', got {mode!r}")
    adj = g.adjacency()
    nv = len(adj)
    if nv == 0:
        return ChromaticResult(value=0, method="exact" if mode == "exact" else "greedy-upper-bound", witness_coloring={})

    greedy_colors = _dsatur(adj)
    if mode == "greedy":
        _verify_proper(adj, greedy_colors)
        value = max(greedy_colors) + 1
        witness = {v: c for v, c in zip(g.vertices, greedy_colors)}
        return ChromaticResult(value=value, method="greedy-upper-bound", witness_coloring=witness)

    if nv > exact_cap:
        raise GraphTooLargeForExact(f"{nv} vertices exceeds the exact-mode cap of {exact_cap}")
    upper = max(greedy_colors) + 1
    lower = _greedy_clique(adj)
    colors = greedy_colors
    for q in range(lower, upper):
        attempt = _colorable(adj, q)
        if attempt is not None:
            colors = attempt
            break
    _verify_proper(adj, colors)
    value = max(colors) + 1
    witness = {v: c for v, c in zip(g.vertices, colors)}
    return ChromaticResult(value=value, method="exact", witness_coloring=witness)


def p_chromatic_number(m, mode: str = "exact", exact_cap: int = 24) -> PChromaticResult:
    """Maximum chromatic number over all row pairs; 0 when k == 1.

    Accepts a matrix or a bare structure. Records the first row pair
    attaining the maximum and the per-pair breakdown.
    """
    s = _as_structure(m)
    method = "exact" if mode == "exact" else "greedy-upper-bound"
    best = 0
    argmax: tuple[int, int] | None = None
    witness: dict[Vertex, int] = {}
    per_pair: list[tuple[int, int, int]] = []
    for k1 in range(1, s.k + 1):
        for k2 in range(k1 + 1, s.k + 1):
            result = chromatic_number(build_graph(s, k1, k2), mode=mode, exact_cap=exact_cap)
            per_pair.append((k1, k2, result.value))
            if argmax is None or result.value > best:
                best = result.value
                argmax = (k1, k2)
                witness = result.witness_coloring
    return PChromaticResult(
        value=best,
        method=method,
        argmax_pair=argmax,
        per_pair=tuple(per_pair),
        witness_coloring=witness,
    )
