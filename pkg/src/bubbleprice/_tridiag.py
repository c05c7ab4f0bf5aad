"""Thomas algorithm for tridiagonal systems, compiled with numba."""

from __future__ import annotations

import numpy as np
import numpy.typing as npt
from numba import njit

FloatArray = npt.NDArray[np.float64]


@njit(cache=True, nogil=True)
def _thomas(lower: FloatArray, diag: FloatArray, upper: FloatArray, rhs: FloatArray) -> FloatArray:  # pragma: no cover
    n = rhs.shape[0]
    b = diag.copy()
    d = rhs.copy()
    for k in range(1, n):
        m = lower[k] / b[k - 1]
        b[k] = b[k] - m * upper[k - 1]
        d[k] = d[k] - m * d[k - 1]
    x = np.empty(n)
    x[n - 1] = d[n - 1] / b[n - 1]
    for k in range(n - 2, -1, -1):
        x[k] = (d[k] - upper[k] * x[k + 1]) / b[k]
    return x


def is_diagonally_dominant(lower: FloatArray, diag: FloatArray, upper: FloatArray) -> bool:
    """Weak row dominance with at least one strict row; no pivoting is needed then."""
    lo = np.abs(lower)
    up = np.abs(upper)
    off = np.concatenate(([0.0], lo[1:])) + np.concatenate((up[:-1], [0.0]))
    return bool(np.all(np.abs(diag) >= off) and np.any(np.abs(diag) > off))


def solve_tridiagonal(lower: FloatArray, diag: FloatArray, upper: FloatArray, rhs: FloatArray) -> FloatArray:
    """Solve ``A x = rhs`` for tridiagonal ``A``.

    ``lower[0]`` and ``upper[-1]`` lie outside the matrix and are ignored.
    """
    n = rhs.shape[0]
    if not (lower.shape[0] == diag.shape[0] == upper.shape[0] == n):
        raise ValueError("tridiagonal bands and right-hand side must have equal length")
    if n == 0:
        return np.empty(0)
    return _thomas(
        np.ascontiguousarray(lower, dtype=np.float64),
        np.ascontiguousarray(diag, dtype=np.float64),
        np.ascontiguousarray(upper, dtype=np.float64),
        np.ascontiguousarray(rhs, dtype=np.float64),
    )
