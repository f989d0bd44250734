"""Dense Gaussian elimination with partial pivoting.

The elimination is vectorised over a leading batch axis so that the many
small systems of an Euler path (one per segment) are solved in one pass.
Pivoting is per system: row exchange by the largest absolute entry in the
pivot column, first index on ties.
"""

from __future__ import annotations

import numpy as np

from .errors import SingularMatrix

PIVOT_TOL = 1e-12


def solve_batched(A: np.ndarray, rhs: np.ndarray, pivot_tol: float = PIVOT_TOL) -> np.ndarray:
    """Solve ``A[b] @ X[b] = rhs[b]`` for every b.

    A has shape (batch, n, n); rhs has shape (batch, n) or (batch, n, k).
    """
    A = np.array(A, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if A.ndim != 3 or A.shape[1] != A.shape[2]:
        raise ValueError(f"expected a stack of square matrices, got shape {A.shape}")
    vector_rhs = rhs.ndim == 2
    R = np.array(rhs[..., None] if vector_rhs else rhs, dtype=float)
    nb, n, _ = A.shape
    if R.shape[:2] != (nb, n):
        raise ValueError(f"rhs shape {rhs.shape} does not match matrices {A.shape}")

    M = np.concatenate([A, R], axis=2)
    rows = np.arange(nb)
    for col in range(n):
        piv = col + np.argmax(np.abs(M[:, col:, col]), axis=1)
        pivval = M[rows, piv, col]
        bad = np.abs(pivval) < pivot_tol
        if bad.any():
            raise SingularMatrix(
                f"pivot magnitude {np.abs(pivval[bad]).min():.3e} below {pivot_tol:g} "
                f"in column {col} (system {int(np.flatnonzero(bad)[0])})"
            )
        swap = piv != col
        if swap.any():
            idx = rows[swap]
            tmp = M[idx, col].copy()
            M[idx, col] = M[idx, piv[swap]]
            M[idx, piv[swap]] = tmp
        below = M[:, col + 1:, col] / M[:, col, col][:, None]
        M[:, col + 1:, col:] -= below[:, :, None] * M[:, col, None, col:]

    X = np.empty_like(R)
    for row in range(n - 1, -1, -1):
        acc = M[:, row, n:] - np.einsum("bj,bjk->bk", M[:, row, row + 1:n], X[:, row + 1:])
        X[:, row] = acc / M[:, row, row][:, None]
    return X[..., 0] if vector_rhs else X


def solve_linear(A, rhs, pivot_tol: float = PIVOT_TOL) -> np.ndarray:
    """Solve a single dense system ``A @ y = rhs`` (rhs may be a matrix)."""
    A = np.asarray(A, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got shape {A.shape}")
    if rhs.shape[0] != A.shape[0]:
        raise ValueError(f"rhs length {rhs.shape[0]} does not match A {A.shape}")
    return solve_batched(A[None], rhs[None], pivot_tol)[0]
