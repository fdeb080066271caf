import numpy as np
import pytest

from psihash import (
    DimensionMismatch,
    GaussianPool,
    InvalidStructure,
    PsiRegularMatrix,
    RowCountExceedsDimension,
    SubsetStructure,
    make_circulant,
    make_general,
    make_toeplitz,
    matrix_from_dict,
    matrix_to_dict,
    structure_from_dict,
    structure_to_dict,
    validate,
)


def test_pool_is_reproducible_bit_for_bit():
    a = GaussianPool.draw(100, seed=123)
    b = GaussianPool.draw(100, seed=123)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, GaussianPool.draw(100, seed=124).values)


def test_pool_rejects_empty():
    with pytest.raises(ValueError):
        GaussianPool.draw(0, seed=1)


# --- constructors ---


def test_toeplitz_smallest_case():
    m = make_toeplitz(1, 1, seed=0)
    assert m.t == 1
    assert m.materialize().shape == (1, 1)
    assert m.materialize()[0, 0] == m.pool.values[0]


def test_toeplitz_k2_n3_mapping():
    # singleton subsets S[i][j] = {i - j + n} give dense [[g3,g2,g1],[g4,g3,g2]]
    m = make_toeplitz(2, 3, seed=42)
    g = m.pool.values
    assert m.t == 4
    assert np.array_equal(m.materialize(), [[g[2], g[1], g[0]], [g[3], g[2], g[1]]])
    dense = m.materialize()
    assert dense[0, 0] == dense[1, 1] and dense[0, 1] == dense[1, 2]
    assert m.structure.subsets[0][0] == frozenset({3})
    assert m.structure.subsets[1][0] == frozenset({4})


def test_circulant_rows_are_cyclic_shifts():
    m = make_circulant(4, 4, seed=5)
    dense = m.materialize()
    for i in range(1, 4):
        assert np.array_equal(dense[i], np.roll(dense[0], i))


def test_circulant_k2_n2_mapping():
    m = make_circulant(2, 2, seed=9)
    g = m.pool.values
    assert np.array_equal(m.materialize(), [[g[0], g[1]], [g[1], g[0]]])


@pytest.mark.parametrize("maker", [make_toeplitz, make_circulant])
def test_constructors_reject_k_above_n(maker):
    with pytest.raises(RowCountExceedsDimension):
        maker(5, 4, seed=0)


@pytest.mark.parametrize("maker", [make_toeplitz, make_circulant])
@pytest.mark.parametrize("k,n", [(1, 1), (2, 3), (4, 4), (3, 8)])
def test_constructors_validate_as_class_zero(maker, k, n):
    report = validate(maker(k, n, seed=7).structure)
    assert report.passed
    assert report.psi_class == 0


# --- validate ---


def test_validate_flags_row_overlap():
    subsets = [[{1}, {1}], [{2}, {3}]]
    s = SubsetStructure(k=2, n=2, t=3, psi=0, subsets=subsets)
    report = validate(s)
    assert not report.passed
    assert report.failed() == ("row_disjoint",)
    detail = next(c for c in report.checks if c.name == "row_disjoint").detail
    assert "row 1" in detail


def test_validate_flags_k_above_n():
    subsets = [[{1}], [{2}], [{3}]]
    s = SubsetStructure(k=3, n=1, t=3, psi=0, subsets=subsets)
    report = validate(s)
    assert "dimension_ordering" in report.failed()


def test_validate_flags_unequal_row_cardinality():
    subsets = [[{1, 2}, {3}], [{4}, {1}]]
    s = SubsetStructure(k=2, n=2, t=4, psi=0, subsets=subsets)
    report = validate(s)
    assert report.failed() == ("row_cardinality",)


def test_validate_flags_column_multiplicity():
    # pool index 1 feeds both rows of column 1; fine at psi>=2, not at psi 0
    subsets = [[{1}, {2}], [{1}, {3}]]
    loose = SubsetStructure(k=2, n=2, t=3, psi=2, subsets=subsets)
    assert validate(loose).passed
    assert validate(loose).psi_class == 2
    tight = SubsetStructure(k=2, n=2, t=3, psi=0, subsets=subsets)
    report = validate(tight)
    assert report.failed() == ("column_multiplicity",)
    assert report.psi_class == 2


def test_structure_rejects_out_of_range_pool_index():
    with pytest.raises(ValueError):
        SubsetStructure(k=1, n=1, t=1, psi=0, subsets=[[{2}]])


# --- make_general ---


def test_general_singletons_match_toeplitz():
    pattern = [[{i - j + 3} for j in range(1, 4)] for i in range(1, 3)]
    general = make_general(2, 3, 4, pattern, seed=42)
    toeplitz = make_toeplitz(2, 3, seed=42)
    assert np.array_equal(general.materialize(), toeplitz.materialize())


def test_general_pair_subsets():
    # |S| = 2 everywhere, disjoint in rows, each index used once per column
    subsets = [
        [{1, 2}, {3, 4}],
        [{3, 4}, {1, 2}],
    ]
    m = make_general(2, 2, 4, subsets, seed=3)
    report = validate(m.structure)
    assert report.passed and report.psi_class == 0
    g = m.pool.values
    expected = [[g[0] + g[1], g[2] + g[3]], [g[2] + g[3], g[0] + g[1]]]
    assert np.allclose(m.materialize(), expected, rtol=1e-12)
    assert m.row_sigma == (2, 2)


def test_general_empty_subsets_give_zero_matrix():
    subsets = [[set(), set()], [set(), set()]]
    m = make_general(2, 2, 2, subsets, seed=0)
    assert np.array_equal(m.materialize(), np.zeros((2, 2)))
    assert validate(m.structure).passed


def test_general_rejects_invalid_structure_with_report():
    subsets = [[{1}, {1}], [{2}, {3}]]
    with pytest.raises(InvalidStructure) as excinfo:
        make_general(2, 2, 3, subsets, seed=0)
    assert excinfo.value.report is not None
    assert "row_disjoint" in excinfo.value.report.failed()


def test_general_materialize_matches_manual_sums():
    subsets = [
        [{1, 4}, {2, 5}, {3, 6}],
        [{7}, {8}, {9}],
        [{7, 8}, {9, 1}, {2, 3}],
    ]
    m = make_general(3, 3, 9, subsets, seed=11)
    g = m.pool.values
    dense = m.materialize()
    for i, row in enumerate(subsets):
        for j, s in enumerate(row):
            manual = sum(g[l - 1] for l in sorted(s))
            assert dense[i, j] == pytest.approx(manual, rel=1e-12)


# --- matvec dispatch ---


def test_matvec_identity_pattern_circulant_scales():
    # pool zeroed beyond the offset-0 gaussian: the matrix is g1 * I
    n = 6
    base = make_circulant(n, n, seed=4)
    values = np.zeros(n)
    values[0] = base.pool.values[0]
    m = PsiRegularMatrix(
        family="circulant", k=n, n=n, pool=GaussianPool(seed=4, values=values)
    )
    x = np.random.default_rng(0).standard_normal(n)
    assert np.allclose(m.matvec(x), values[0] * x)


def test_matvec_zero_pool_gives_zero():
    m = PsiRegularMatrix(
        family="toeplitz", k=2, n=3, pool=GaussianPool(seed=0, values=np.zeros(4))
    )
    assert np.allclose(m.matvec([1.0, 2.0, 3.0]), 0.0)


@pytest.mark.parametrize(
    "m",
    [
        make_toeplitz(16, 64, seed=21),
        make_circulant(16, 64, seed=22),
        make_general(2, 3, 6, [[{1, 2}, {3, 4}, {5, 6}], [{6}, {2}, {4}]], seed=23),
    ],
    ids=["toeplitz", "circulant", "general"],
)
def test_matvec_matches_dense_path(m):
    rng = np.random.default_rng(0)
    for _ in range(5):
        x = rng.standard_normal(m.n)
        want = m.materialize() @ x
        got = m.matvec(x)
        assert np.linalg.norm(got - want) <= 1e-9 * max(np.linalg.norm(want), 1.0)


def test_matvec_rejects_wrong_length():
    with pytest.raises(DimensionMismatch):
        make_toeplitz(2, 4, seed=0).matvec([1.0, 2.0])


def test_general_invalid_cardinality_cannot_be_constructed():
    # diagonal-only pattern has unequal cardinalities within a row
    subsets = [[{1} if i == j else set() for j in range(3)] for i in range(3)]
    with pytest.raises(InvalidStructure):
        make_general(3, 3, 3, subsets, seed=0)


# --- entry distribution ---


def test_entry_variance_tracks_row_cardinality():
    # rows with |S| in {1, 2, 4}: entry variance should match the cardinality
    subsets = [
        [{1}, {2}, {3}, {4}],
        [{1, 2}, {3, 4}, {5, 6}, {7, 8}],
        [{1, 2, 3, 4}, {5, 6, 7, 8}, {9, 10, 11, 12}, {13, 14, 15, 16}],
        [{13}, {14}, {15}, {16}],
    ]
    entries = np.empty((3, 2000))
    for seed in range(2000):
        m = make_general(4, 4, 16, subsets, seed=seed)
        entries[:, seed] = m.materialize()[:3, 0]
    variances = entries.var(axis=1, ddof=1)
    for var, sigma in zip(variances, (1.0, 2.0, 4.0)):
        assert abs(var - sigma) <= 0.1 * sigma


def test_row_sigma_reports_cardinality():
    assert make_toeplitz(3, 5, seed=0).row_sigma == (1, 1, 1)
    m = make_general(2, 2, 8, [[{1, 2}, {3, 4}], [{5, 6}, {7, 8}]], seed=1)
    assert m.row_sigma == (2, 2)


# --- serialization ---


def test_structure_round_trip():
    m = make_toeplitz(3, 4, seed=17)
    doc = structure_to_dict(m.structure)
    assert doc["k"] == 3 and doc["n"] == 4 and doc["t"] == 6 and doc["psi"] == 0
    assert len(doc["subsets"]) == 12  # row-major flat list
    back = structure_from_dict(doc)
    assert back.subsets == m.structure.subsets


def test_matrix_round_trip_regenerates_pool():
    m = make_general(2, 2, 4, [[{1}, {2}], [{3}, {4}]], seed=99)
    back = matrix_from_dict(matrix_to_dict(m))
    assert np.array_equal(back.materialize(), m.materialize())
    assert back.family == m.family
