import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from symscatter.errors import DimensionMismatch, SingularMatrix, ValidationError
from symscatter.numerics import as_cmatrix, det, frobenius_norm, invert, is_unitary, minor, solve


def test_identity_and_permutation_inverse():
    assert np.allclose(invert(np.eye(3)), np.eye(3))
    assert np.allclose(invert([[0, 1], [1, 0]]), [[0, 1], [1, 0]])


def test_zero_leading_pivot_needs_pivoting():
    # Delta at k = -pi/2 of a zero-diagonal center has a zero (0,0) entry
    m = np.array([[0, 1, 1], [1, 0, -1j], [1, 1, 0]])
    inv = invert(m)
    assert np.linalg.norm(m @ inv - np.eye(3)) < 1e-12


def test_singular_raises():
    with pytest.raises(SingularMatrix):
        invert([[1, 2], [2, 4]])
    with pytest.raises(SingularMatrix):
        solve(np.zeros((2, 2)), [1, 1])


def test_solve_simple():
    assert np.allclose(solve(np.eye(3), [1, 2j, 3]), [1, 2j, 3])
    assert np.allclose(solve([[2, 0], [0, 2]], [1, 1]), [0.5, 0.5])


def test_solve_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        solve(np.eye(3), [1, 2])


def test_frobenius():
    assert frobenius_norm(np.zeros((3, 3))) == 0
    assert frobenius_norm(np.eye(4)) == pytest.approx(2.0)
    assert frobenius_norm([[3, 4j], [0, 0]]) == pytest.approx(5.0)


def test_rejects_non_finite_and_bad_shapes():
    with pytest.raises(ValidationError):
        as_cmatrix([[1, np.nan], [0, 1]])
    with pytest.raises(ValidationError):
        as_cmatrix([[1, 2, 3], [4, 5, 6]], square=True)
    with pytest.raises(ValidationError):
        as_cmatrix([1, 2])


def test_det_and_minor():
    m = np.array([[2, 1, 0], [1, 3, 1j], [0, -1j, 4]])
    assert det(m) == pytest.approx(np.linalg.det(m))
    assert minor(m, [0], [0]) == pytest.approx(np.linalg.det(m[1:, 1:]))
    assert det(np.zeros((2, 2))) == 0
    assert det(np.zeros((0, 0))) == 1


def _random_matrix(seed, n):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) + 3 * np.eye(n)


@given(st.integers(0, 10**6), st.integers(1, 8))
def test_invert_twice_is_identity(seed, n):
    m = _random_matrix(seed, n)
    back = invert(invert(m))
    assert frobenius_norm(back - m) <= 1e-9 * frobenius_norm(m)


@given(st.integers(0, 10**6), st.integers(1, 8))
def test_solve_agrees_with_inverse(seed, n):
    m = _random_matrix(seed, n)
    rng = np.random.default_rng(seed + 1)
    x_true = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    b = m @ x_true
    x = solve(m, b)
    assert np.linalg.norm(x - x_true) <= 1e-9 * max(1, np.linalg.norm(x_true))
    assert np.linalg.norm(x - invert(m) @ b) <= 1e-9 * max(1, np.linalg.norm(x))
    resid = np.linalg.norm(m @ x - b)
    assert resid <= 1e-10 * (frobenius_norm(m) * np.linalg.norm(x) + np.linalg.norm(b))


@given(st.integers(0, 10**6), st.integers(1, 6))
def test_is_unitary_on_qr_factors(seed, n):
    m = _random_matrix(seed, n)
    q, _ = np.linalg.qr(m)
    assert is_unitary(q)
    assert not is_unitary(2 * q)
