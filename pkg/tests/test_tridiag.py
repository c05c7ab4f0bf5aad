"""Tests for the Thomas solver."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bubbleprice._tridiag import is_diagonally_dominant, solve_tridiagonal


def _dense(lower, diag, upper):
    n = diag.size
    a = np.diag(diag)
    a[np.arange(1, n), np.arange(n - 1)] = lower[1:]
    a[np.arange(n - 1), np.arange(1, n)] = upper[:-1]
    return a


class TestSolveTridiagonal:
    def test_matches_dense_solve(self):
        rng = np.random.default_rng(0)
        n = 12
        lower, upper = rng.uniform(-1, 1, n), rng.uniform(-1, 1, n)
        diag = 3.0 + rng.uniform(0, 1, n)
        rhs = rng.normal(size=n)
        x = solve_tridiagonal(lower, diag, upper, rhs)
        np.testing.assert_allclose(x, np.linalg.solve(_dense(lower, diag, upper), rhs), rtol=1e-12, atol=1e-12)

    def test_outside_entries_are_ignored(self):
        diag = np.array([2.0, 2.0, 2.0])
        rhs = np.array([1.0, 0.0, 1.0])
        a = solve_tridiagonal(np.array([0.0, -1.0, -1.0]), diag, np.array([-1.0, -1.0, 0.0]), rhs)
        b = solve_tridiagonal(np.array([99.0, -1.0, -1.0]), diag, np.array([-1.0, -1.0, 99.0]), rhs)
        np.testing.assert_array_equal(a, b)
        np.testing.assert_allclose(a, [1.0, 1.0, 1.0])

    def test_single_equation(self):
        assert solve_tridiagonal(np.zeros(1), np.array([4.0]), np.zeros(1), np.array([2.0]))[0] == 0.5

    def test_empty(self):
        assert solve_tridiagonal(np.empty(0), np.empty(0), np.empty(0), np.empty(0)).size == 0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            solve_tridiagonal(np.zeros(2), np.ones(3), np.zeros(3), np.ones(3))

    def test_inputs_untouched(self):
        diag = np.array([2.0, 2.0])
        rhs = np.array([1.0, 1.0])
        solve_tridiagonal(np.array([0.0, -1.0]), diag, np.array([-1.0, 0.0]), rhs)
        np.testing.assert_array_equal(diag, [2.0, 2.0])
        np.testing.assert_array_equal(rhs, [1.0, 1.0])


class TestDiagonalDominance:
    def test_heat_matrix(self):
        n = 5
        assert is_diagonally_dominant(np.full(n, -1.0), np.full(n, 2.0), np.full(n, -1.0))

    def test_weak_everywhere_is_not_enough(self):
        assert not is_diagonally_dominant(np.array([0.0, -1.0]), np.array([1.0, 1.0]), np.array([-1.0, 0.0]))

    def test_violated(self):
        assert not is_diagonally_dominant(np.full(3, -2.0), np.full(3, 1.0), np.full(3, -2.0))


@settings(max_examples=100, deadline=None, derandomize=True)
@given(
    n=st.integers(1, 40),
    a=st.floats(0.0, 1e4, allow_nan=False),
    seed=st.integers(0, 1000),
)
def test_implicit_heat_step_agrees_with_dense(n, a, seed):
    rhs = np.random.default_rng(seed).normal(size=n)
    lower, diag, upper = np.full(n, -a), np.full(n, 1.0 + 2.0 * a), np.full(n, -a)
    x = solve_tridiagonal(lower, diag, upper, rhs)
    np.testing.assert_allclose(_dense(lower, diag, upper) @ x, rhs, atol=1e-8 * (1.0 + a))
