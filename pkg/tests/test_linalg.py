import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dsdcarbon.errors import SingularMatrix
from dsdcarbon.linalg import solve_batched, solve_linear


def test_identity():
    rhs = np.array([1.5, -2.0, 3.25])
    np.testing.assert_array_equal(solve_linear(np.eye(3), rhs), rhs)


def test_diagonal():
    np.testing.assert_array_equal(solve_linear([[2.0, 0.0], [0.0, 4.0]], [6.0, 8.0]), [3.0, 2.0])


def test_rank_deficient():
    with pytest.raises(SingularMatrix):
        solve_linear([[1.0, 1.0], [1.0, 1.0]], [1.0, 2.0])


def test_needs_row_exchange():
    np.testing.assert_array_equal(solve_linear([[0.0, 1.0], [1.0, 0.0]], [3.0, 4.0]), [4.0, 3.0])


def test_matrix_rhs_and_shape_errors():
    A = np.array([[4.0, 1.0], [2.0, 3.0]])
    X = solve_linear(A, np.eye(2))
    np.testing.assert_allclose(A @ X, np.eye(2), atol=1e-14)
    with pytest.raises(ValueError):
        solve_linear(np.ones((2, 3)), [1.0, 2.0])
    with pytest.raises(ValueError):
        solve_linear(np.eye(2), [1.0, 2.0, 3.0])


def test_batched_matches_numpy():
    rng = np.random.default_rng(5)
    A = rng.normal(size=(50, 8, 8)) + 4 * np.eye(8)
    B = rng.normal(size=(50, 8, 16))
    np.testing.assert_allclose(solve_batched(A, B), np.linalg.solve(A, B), rtol=1e-10, atol=1e-12)


@settings(max_examples=200)
@given(
    arrays(float, (6, 6), elements=st.floats(-100, 100)),
    arrays(float, (6,), elements=st.floats(-100, 100)),
)
def test_residual_bound(A, b):
    A = A + np.diag(np.where(np.diag(A) >= 0, 1.0, -1.0) * (np.abs(A).sum(axis=1) + 1.0))
    y = solve_linear(A, b)
    assert np.max(np.abs(A @ y - b)) <= 1e-10 * max(np.max(np.abs(b)), 1e-300) + 1e-300
