import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from psihash import (
    CirculantSpec,
    DimensionMismatch,
    NonPowerOfTwoLength,
    RowCountExceedsDimension,
    ToeplitzSpec,
    apply_diagonal,
    circulant_matvec,
    dense_matvec,
    fwht_normalized,
    sylvester_hadamard,
    toeplitz_matvec,
)

finite_floats = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


def random_vector(rng, n):
    return rng.standard_normal(n)


def rel_err(got, want):
    scale = max(np.linalg.norm(want), 1e-300)
    return np.linalg.norm(got - want) / scale


# --- fwht_normalized ---


def test_fwht_first_basis_vector():
    assert np.allclose(fwht_normalized([1, 0, 0, 0]), [0.5, 0.5, 0.5, 0.5])


def test_fwht_rejects_non_power_of_two():
    with pytest.raises(NonPowerOfTwoLength):
        fwht_normalized([1.0, 2.0, 3.0])


def test_fwht_matches_dense_oracle_n16():
    rng = np.random.default_rng(0)
    h = sylvester_hadamard(16)
    for _ in range(20):
        x = random_vector(rng, 16)
        assert rel_err(fwht_normalized(x), h @ x) <= 1e-12


@pytest.mark.parametrize("exp", range(15))
def test_fwht_involution_and_norm_up_to_2_14(exp):
    n = 2**exp
    x = random_vector(np.random.default_rng(exp), n)
    y = fwht_normalized(x)
    assert np.abs(fwht_normalized(y) - x).max() <= 1e-10
    assert abs(np.linalg.norm(y) - np.linalg.norm(x)) <= 1e-10 * np.linalg.norm(x)


@given(st.lists(finite_floats, min_size=8, max_size=8))
def test_fwht_matches_dense_oracle_hypothesis(values):
    x = np.asarray(values)
    h = sylvester_hadamard(8)
    assert np.allclose(fwht_normalized(x), h @ x, rtol=1e-12, atol=1e-9)


def test_hadamard_rademacher_composition_preserves_angles():
    # both stages are rotations, so pairwise angles survive the front end
    rng = np.random.default_rng(42)
    n = 256
    signs = rng.integers(0, 2, n) * 2.0 - 1.0
    for _ in range(10):
        u = random_vector(rng, n)
        u /= np.linalg.norm(u)
        v = random_vector(rng, n)
        v /= np.linalg.norm(v)
        hu = fwht_normalized(apply_diagonal(signs, u))
        hv = fwht_normalized(apply_diagonal(signs, v))
        before = np.arccos(np.clip(u @ v, -1, 1))
        after = np.arccos(np.clip(hu @ hv, -1, 1))
        assert abs(before - after) <= 1e-8


# --- apply_diagonal ---


def test_apply_diagonal_identity():
    assert np.array_equal(apply_diagonal([1, 1, 1], [1, 2, 3]), [1, 2, 3])


def test_apply_diagonal_flips_signs():
    assert np.array_equal(apply_diagonal([-1, 1, -1], [1, 2, 3]), [-1, 2, -3])


def test_apply_diagonal_rejects_mismatch_and_bad_signs():
    with pytest.raises(DimensionMismatch):
        apply_diagonal([1, -1], [1, 2, 3])
    with pytest.raises(ValueError):
        apply_diagonal([1, 0, -1], [1, 2, 3])


@given(st.lists(finite_floats, min_size=1, max_size=64), st.randoms(use_true_random=False))
def test_apply_diagonal_preserves_norm(values, rnd):
    x = np.asarray(values)
    d = np.array([rnd.choice((-1.0, 1.0)) for _ in values])
    assert np.linalg.norm(apply_diagonal(d, x)) == pytest.approx(np.linalg.norm(x), abs=0.0)


# --- circulant_matvec ---


def test_circulant_identity():
    spec = CirculantSpec([1, 0, 0, 0])
    x = np.array([5.0, -2.0, 3.0, 7.0])
    assert np.allclose(circulant_matvec(spec, x), x)


def test_circulant_single_shift():
    # hand multiply of the explicit 4x4 shift circulant
    spec = CirculantSpec([0, 1, 0, 0])
    assert np.allclose(circulant_matvec(spec, [1, 2, 3, 4]), [2, 3, 4, 1])


def test_circulant_matches_dense_n8():
    rng = np.random.default_rng(1)
    for _ in range(20):
        spec = CirculantSpec(random_vector(rng, 8))
        x = random_vector(rng, 8)
        assert rel_err(circulant_matvec(spec, x), dense_matvec(spec.dense(), x)) <= 1e-9


def test_circulant_rejects_mismatch():
    with pytest.raises(DimensionMismatch):
        circulant_matvec(CirculantSpec([1, 0]), [1, 2, 3])


# --- toeplitz_matvec ---


def test_toeplitz_zero_diagonals():
    spec = ToeplitzSpec(np.zeros(7))
    assert np.array_equal(toeplitz_matvec(spec, np.arange(4.0), 3), np.zeros(3))


def test_toeplitz_main_diagonal_is_truncated_identity():
    d = np.zeros(7)
    d[3] = 1.0  # offset 0
    x = np.array([4.0, 3.0, 2.0, 1.0])
    assert np.allclose(toeplitz_matvec(ToeplitzSpec(d), x, 2), x[:2])


def test_toeplitz_matches_dense_n8_k4():
    rng = np.random.default_rng(2)
    for _ in range(20):
        spec = ToeplitzSpec(random_vector(rng, 15))
        x = random_vector(rng, 8)
        assert rel_err(toeplitz_matvec(spec, x, 4), dense_matvec(spec.dense(4), x)) <= 1e-9


def test_toeplitz_rejects_bad_row_count():
    spec = ToeplitzSpec(np.ones(7))
    with pytest.raises(RowCountExceedsDimension):
        toeplitz_matvec(spec, np.ones(4), 5)


def test_toeplitz_dense_is_constant_on_diagonals():
    rng = np.random.default_rng(3)
    dense = ToeplitzSpec(random_vector(rng, 11)).dense(4)
    for i in range(3):
        for j in range(5):
            assert dense[i, j] == dense[i + 1, j + 1]


# --- dense_matvec ---


def test_dense_matvec_identity_and_zero():
    x = np.array([1.0, -2.0, 3.0])
    assert np.array_equal(dense_matvec(np.eye(3), x), x)
    assert np.array_equal(dense_matvec(np.zeros((2, 3)), x), np.zeros(2))


def test_dense_matvec_hand_example():
    assert np.array_equal(dense_matvec([[1, 2], [3, 4]], [1, 1]), [3, 7])


def test_dense_matvec_rejects_mismatch():
    with pytest.raises(DimensionMismatch):
        dense_matvec(np.ones((2, 3)), np.ones(4))


# --- fast paths vs oracle across sizes (lighter sibling of the acceptance gate) ---


@pytest.mark.parametrize("n", [4, 8, 16, 64, 256])
def test_fast_paths_agree_with_dense_oracle(n):
    rng = np.random.default_rng(n)
    k = max(1, n // 4)
    for _ in range(10):
        x = random_vector(rng, n)
        c = CirculantSpec(random_vector(rng, n))
        assert rel_err(circulant_matvec(c, x), dense_matvec(c.dense(), x)) <= 1e-9
        t = ToeplitzSpec(random_vector(rng, 2 * n - 1))
        assert rel_err(toeplitz_matvec(t, x, k), dense_matvec(t.dense(k), x)) <= 1e-9
