"""Tests for the Monte Carlo estimators."""

from __future__ import annotations

import math

import numpy as np
import pytest

from bubbleprice._numeric import binomial_stderr, mean_and_stderr


class TestMeanAndStderr:
    def test_matches_textbook_formula(self):
        v = np.array([1.0, 2.0, 3.0, 4.0])
        mean, se = mean_and_stderr(v)
        assert mean == pytest.approx(2.5)
        assert se == pytest.approx(np.std(v, ddof=1) / 2.0)

    def test_constant_samples_have_zero_error(self):
        mean, se = mean_and_stderr(np.full(1000, 0.7))
        assert mean == 0.7
        assert se == 0.0

    def test_all_zero(self):
        assert mean_and_stderr(np.zeros(5)) == (0.0, 0.0)

    def test_single_value(self):
        assert mean_and_stderr([3.0]) == (3.0, 0.0)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            mean_and_stderr([])

    def test_huge_values_do_not_overflow(self):
        v = np.array([1.0, 1e300, 2.0, 1.0])
        mean, se = mean_and_stderr(v)
        assert math.isfinite(mean) and math.isfinite(se)
        assert mean == pytest.approx(0.25e300)
        # one dominant outlier: stderr is about the same size as the mean
        assert se == pytest.approx(0.25e300, rel=1e-6)


class TestBinomialStderr:
    def test_formula(self):
        assert binomial_stderr(0.25, 100) == pytest.approx(math.sqrt(0.25 * 0.75 / 100))

    def test_degenerate(self):
        assert binomial_stderr(0.0, 10) == 0.0
        assert binomial_stderr(1.0, 10) == 0.0

    def test_needs_samples(self):
        with pytest.raises(ValueError):
            binomial_stderr(0.5, 0)
