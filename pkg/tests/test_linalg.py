import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dcelm.errors import InvalidInputError
from dcelm.linalg import as_matrix, default_tolerance, least_squares_min_norm, pseudoinverse


def penrose_residuals(a, p):
    return (
        np.linalg.norm(a @ p @ a - a),
        np.linalg.norm(p @ a @ p - p),
        np.linalg.norm((a @ p).T - a @ p),
        np.linalg.norm((p @ a).T - p @ a),
    )


def low_rank(rng, m, n, r):
    return rng.normal(size=(m, r)) @ rng.normal(size=(r, n))


def test_full_rank_5x3_penrose():
    a = np.random.default_rng(1).normal(size=(5, 3))
    assert max(penrose_residuals(a, pseudoinverse(a))) < 1e-10


def test_square_invertible_matches_inverse():
    a = np.array([[2.0, 1.0], [1.0, 3.0]])
    np.testing.assert_allclose(pseudoinverse(a), np.linalg.inv(a), atol=1e-14)


def test_zero_matrix_gives_zero_transpose_shape():
    p = pseudoinverse(np.zeros((3, 2)))
    assert p.shape == (2, 3)
    assert np.all(p == 0)


def test_rank_one_outer_product():
    # (u v^T)^+ = v u^T / (|u|^2 |v|^2)
    u = np.array([[1.0], [2.0], [2.0]])
    v = np.array([[3.0], [4.0]])
    expected = v @ u.T / (9.0 * 25.0)
    np.testing.assert_allclose(pseudoinverse(u @ v.T), expected, atol=1e-15)


def test_rank_deficient_truncation():
    a = low_rank(np.random.default_rng(4), 6, 5, 2)
    p = pseudoinverse(a)
    assert np.linalg.matrix_rank(p) == 2
    assert max(penrose_residuals(a, p)) < 1e-9


def test_explicit_tolerance_drops_small_singular_values():
    a = np.diag([3.0, 1e-3])
    np.testing.assert_allclose(pseudoinverse(a, tol=1e-2), np.diag([1 / 3.0, 0.0]))
    np.testing.assert_allclose(pseudoinverse(a), np.diag([1 / 3.0, 1e3]))


def test_default_tolerance_formula():
    assert default_tolerance((4, 7), 2.0) == 7 * np.finfo(float).eps * 2.0


def test_normal_equations_oracle():
    rng = np.random.default_rng(7)
    h = rng.normal(size=(4, 2))
    t = rng.normal(size=(4, 1))
    expected = np.linalg.solve(h.T @ h, h.T @ t)
    np.testing.assert_allclose(least_squares_min_norm(h, t), expected, atol=1e-10)


def test_underdetermined_min_norm_matches_lstsq():
    rng = np.random.default_rng(8)
    h = rng.normal(size=(3, 6))
    t = rng.normal(size=(3, 2))
    q = least_squares_min_norm(h, t)
    np.testing.assert_allclose(q, np.linalg.lstsq(h, t, rcond=None)[0], atol=1e-12)
    np.testing.assert_allclose(h @ q, t, atol=1e-12)


def test_row_mismatch_raises():
    with pytest.raises(InvalidInputError, match="row mismatch"):
        least_squares_min_norm(np.ones((3, 2)), np.ones((4, 1)))


@pytest.mark.parametrize("bad", [np.ones((0, 3)), np.ones((2, 2, 2)), [[1.0, np.nan]], [[np.inf]]])
def test_as_matrix_rejects(bad):
    with pytest.raises(InvalidInputError):
        as_matrix(bad)


def test_as_matrix_promotes_vector_to_column():
    assert as_matrix([1.0, 2.0, 3.0]).shape == (3, 1)


def test_negative_tolerance_rejected():
    with pytest.raises(InvalidInputError):
        pseudoinverse(np.eye(2), tol=-1.0)


@settings(max_examples=60, deadline=None)
@given(m=st.integers(1, 8), n=st.integers(1, 8), r=st.integers(0, 8), seed=st.integers(0, 2**32 - 1))
def test_penrose_conditions_property(m, n, r, seed):
    rng = np.random.default_rng(seed)
    r = min(r, m, n)
    a = low_rank(rng, m, n, r) if r else np.zeros((m, n))
    p = pseudoinverse(a)
    scale = max(1.0, np.linalg.norm(a)) ** 2
    assert max(penrose_residuals(a, p)) < 1e-9 * scale


@settings(max_examples=40, deadline=None)
@given(m=st.integers(2, 7), n=st.integers(2, 7), seed=st.integers(0, 2**32 - 1))
def test_min_norm_against_null_space_perturbation(m, n, seed):
    rng = np.random.default_rng(seed)
    r = min(m, n) - 1
    h = low_rank(rng, m, n, r)
    t = rng.normal(size=(m, 2))
    q = least_squares_min_norm(h, t)
    # adding any null-space component keeps the residual but grows the norm
    _, s, vt = np.linalg.svd(h)
    null = vt[r:].T
    z = null @ rng.normal(size=(null.shape[1], 2))
    q2 = q + z
    np.testing.assert_allclose(h @ q2, h @ q, atol=1e-8)
    assert np.linalg.norm(q2) >= np.linalg.norm(q) - 1e-12
