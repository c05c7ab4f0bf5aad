"""Tests for the local-volatility models and the closed-form CEV oracles."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bubbleprice import (
    LocalVolModel,
    MartingaleClass,
    Payoff,
    PreconditionError,
    cev_expectation,
    cev_family,
    cev_price,
    classify_martingale,
    martingale_defect,
    norm_cdf,
    sigma_eval,
    uniqueness_integral_diverges,
)

# 1 - 2 Phi(-1) = erf(1 / sqrt 2)
CEV_PRICE_1 = 0.6826894921370859
CEV_DEFECT_1 = 0.31731050786291415


# ---------------------------------------------------------------------------
# LocalVolModel
# ---------------------------------------------------------------------------

class TestLocalVolModel:
    def test_cev_constructor(self):
        m = LocalVolModel.cev()
        assert (m.c, m.p, m.x0) == (1.0, 2.0, 1.0)
        assert m.is_cev

    def test_sigma_power_law(self):
        m = LocalVolModel.power(0.5, 1.5)
        assert sigma_eval(m, 4.0) == pytest.approx(0.5 * 8.0)

    @pytest.mark.parametrize("p", [0.0, 0.5, 1.0, 2.0])
    def test_sigma_vanishes_at_zero(self, p):
        assert sigma_eval(LocalVolModel.power(1.0, p), 0.0) == 0.0

    def test_sigma_even_extension(self):
        m = LocalVolModel.cev()
        assert float(m.sigma_even(-3.0)) == float(m.sigma(3.0)) == 9.0
        assert float(m.sigma(-3.0)) == 0.0

    def test_sigma_eval_rejects_negative(self):
        with pytest.raises(PreconditionError):
            sigma_eval(LocalVolModel.cev(), -1.0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"c": 0.0, "p": 1.0},
            {"c": -1.0, "p": 1.0},
            {"c": 1.0, "p": -0.5},
            {"c": 1.0, "p": 1.0, "x0": 0.0},
            {"c": math.inf, "p": 1.0},
            {"c": 1.0, "p": 1.0, "kind": "table"},
        ],
    )
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(PreconditionError):
            LocalVolModel(**kwargs)

    def test_json(self):
        m = LocalVolModel.power(0.3, 1.2, 2.0)
        assert m.to_json() == {"kind": "power", "c": 0.3, "p": 1.2, "x0": 2.0}
        assert LocalVolModel.from_json(m.to_json()) == m

    def test_json_missing_field(self):
        with pytest.raises(PreconditionError, match="'p'"):
            LocalVolModel.from_json({"c": 1.0, "x0": 1.0})


# ---------------------------------------------------------------------------
# Martingale classification
# ---------------------------------------------------------------------------

class TestClassification:
    @pytest.mark.parametrize(
        ("p", "expected"),
        [
            (0.0, MartingaleClass.TRUE_MARTINGALE),
            (0.5, MartingaleClass.TRUE_MARTINGALE),
            (1.0, MartingaleClass.TRUE_MARTINGALE),
            (1.001, MartingaleClass.STRICT_LOCAL_MARTINGALE),
            (2.0, MartingaleClass.STRICT_LOCAL_MARTINGALE),
        ],
    )
    def test_power_law(self, p, expected):
        assert classify_martingale(LocalVolModel.power(1.0, p)) is expected

    def test_integral_criterion_ignores_scale(self):
        for c in (0.01, 1.0, 100.0):
            assert uniqueness_integral_diverges(LocalVolModel.power(c, 1.0))
            assert not uniqueness_integral_diverges(LocalVolModel.power(c, 1.5))


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

class TestCevOracles:
    def test_price_at_unit(self):
        assert cev_price(1.0, 0.0, 1.0) == pytest.approx(CEV_PRICE_1, abs=1e-12)
        assert cev_price(1.0, 0.0, 1.0) == pytest.approx(1.0 - 2.0 * norm_cdf(-1.0), abs=1e-12)

    def test_defect_at_unit(self):
        assert martingale_defect(1.0, 0.0, 1.0) == pytest.approx(CEV_DEFECT_1, abs=1e-12)

    def test_price_plus_defect_is_x(self):
        x = np.array([0.1, 1.0, 5.0, 50.0])
        t = np.array([0.0, 0.5, 0.9, 0.99])
        np.testing.assert_allclose(cev_price(x, t, 1.0) + martingale_defect(x, t, 1.0), x, rtol=1e-14)

    def test_family_members(self):
        assert cev_family(2.0, 0.3, 1.0, 2.0) == pytest.approx(cev_price(2.0, 0.3, 1.0), rel=1e-14)
        assert cev_family(2.0, 0.3, 1.0, 0.0) == pytest.approx(2.0)
        assert cev_family(50.0, 0.0, 1.0, 4.0) < 0.0

    def test_family_solves_the_pricing_equation(self):
        # u_t + 1/2 x^4 u_xx = 0, checked by central differences
        x, t, T, d = 1.3, 0.4, 1.0, 1e-3
        for lam in (0.0, 2.0, 4.0):
            u_t = (cev_family(x, t + d, T, lam) - cev_family(x, t - d, T, lam)) / (2 * d)
            u_xx = (cev_family(x + d, t, T, lam) - 2 * cev_family(x, t, T, lam) + cev_family(x - d, t, T, lam)) / d**2
            assert u_t + 0.5 * x**4 * u_xx == pytest.approx(0.0, abs=1e-5)

    def test_price_is_below_x(self):
        assert 0.0 < cev_price(10.0, 0.0, 1.0) < 10.0

    def test_bounded_as_x_grows(self):
        # V(x, t) tends to sqrt(2 / (pi (T - t)))
        assert cev_price(1e6, 0.0, 1.0) == pytest.approx(math.sqrt(2.0 / math.pi), rel=1e-6)

    def test_price_increases_in_x_and_decreases_in_time_to_maturity(self):
        x = np.geomspace(0.05, 50.0, 200)
        tau = np.array([0.01, 0.1, 0.5, 1.0, 2.0])
        v = cev_price(x[None, :], 2.5 - tau[:, None], 2.5)
        assert np.all(np.diff(v, axis=1) > 0.0)
        assert np.all(np.diff(v, axis=0) <= 1e-15)
        assert np.all(v[-1] < v[0])

    def test_family_decreases_in_lambda(self):
        x = np.geomspace(0.1, 100.0, 60)
        members = np.array([cev_family(x, 0.0, 1.0, lam) for lam in (0.0, 0.5, 1.0, 2.0, 3.0, 4.0)])
        assert np.all(np.diff(members, axis=0) <= 0.0)
        assert np.all(members[:4] >= 0.0)
        # past lam = 2 the members go negative once x is large
        for row in members[4:]:
            assert np.any(row < 0.0)
            assert row[0] > 0.0

    @pytest.mark.parametrize(("x", "t"), [(0.0, 0.0), (-1.0, 0.0), (1.0, 1.0), (1.0, 2.0), (1.0, -0.1)])
    def test_domain(self, x, t):
        with pytest.raises(PreconditionError):
            cev_price(x, t, 1.0)

    def test_negative_lambda_rejected(self):
        with pytest.raises(PreconditionError):
            cev_family(1.0, 0.0, 1.0, -1.0)

    def test_norm_cdf(self):
        assert norm_cdf(0.0) == 0.5
        assert norm_cdf(-1.0) == pytest.approx(0.15865525393145707, rel=1e-12)
        # the lower tail underflows to zero near -38.5
        assert 0.0 < norm_cdf(-37.0) < 1e-298
        assert norm_cdf(-40.0) == 0.0


class TestCevExpectation:
    def test_identity_matches_closed_form(self):
        for x, t in [(1.0, 0.0), (0.5, 0.2), (3.0, 0.5)]:
            got = cev_expectation(Payoff.identity(), x, t, 1.0)
            assert got == pytest.approx(cev_price(x, t, 1.0), abs=1e-8)

    def test_constant_payoff_integrates_density(self):
        assert cev_expectation(Payoff.constant(1.0), 1.0, 0.0, 1.0) == pytest.approx(1.0, abs=1e-9)

    def test_concave_payoff_below_jensen_bound(self):
        v = cev_expectation(Payoff.power(0.5), 1.0, 0.0, 1.0)
        assert 0.0 < v < math.sqrt(cev_price(1.0, 0.0, 1.0))


# ---------------------------------------------------------------------------
# Properties
# ---------------------------------------------------------------------------

@settings(max_examples=100, deadline=None, derandomize=True)
@given(
    x=st.floats(1e-3, 1e3, allow_nan=False),
    t=st.floats(0.0, 0.999, allow_nan=False),
)
def test_price_between_zero_and_x(x, t):
    v = cev_price(x, t, 1.0)
    assert 0.0 <= v <= x


@settings(max_examples=100, deadline=None, derandomize=True)
@given(x=st.floats(1e-2, 1e2, allow_nan=False), lam=st.floats(0.0, 2.0, allow_nan=False))
def test_price_is_the_smallest_nonnegative_member(x, lam):
    # members with lam < 2 lie above the price
    assert cev_family(x, 0.0, 1.0, lam) >= cev_price(x, 0.0, 1.0) - 1e-12 * x
