"""Hypothesis strategies for models, payoffs, rebates and grids.

Exported as ``bubbleprice.strategies`` so property suites in other
packages can reuse them.
"""

from __future__ import annotations

from typing import Any

from hypothesis import strategies as st

from bubbleprice._mc import McConfig
from bubbleprice._models import LocalVolModel
from bubbleprice._payoffs import Payoff, RebateSpec
from bubbleprice._pde import GridSpec

_finite = {"allow_nan": False, "allow_infinity": False}


def exponents(max_p: float = 2.0) -> st.SearchStrategy[float]:
    """Volatility exponents, with the CEV and geometric cases weighted in."""
    return st.one_of(st.sampled_from([0.0, 0.5, 1.0, 1.5, 2.0]), st.floats(0.0, max_p, **_finite))


def models(
    *,
    max_p: float = 2.0,
    c_range: tuple[float, float] = (0.05, 2.0),
    x0_range: tuple[float, float] = (0.1, 4.0),
) -> st.SearchStrategy[LocalVolModel]:
    return st.builds(
        LocalVolModel.power,
        c=st.floats(*c_range, **_finite),
        p=exponents(max_p),
        x0=st.floats(*x0_range, **_finite),
    )


def payoffs(*, max_strike: float = 5.0, max_value: float = 5.0) -> st.SearchStrategy[Payoff]:
    return st.one_of(
        st.just(Payoff.identity()),
        st.floats(0.0, 1.0, **_finite).map(Payoff.power),
        st.floats(0.01, max_strike, **_finite).map(Payoff.call),
        st.floats(0.0, max_value, **_finite).map(Payoff.constant),
    )


def rebates(*, max_value: float = 5.0) -> st.SearchStrategy[RebateSpec]:
    return st.one_of(
        st.just(RebateSpec.zero()),
        st.floats(0.0, max_value, **_finite).map(RebateSpec.constant),
        st.floats(0.0, 1.0, **_finite).map(RebateSpec.power),
    )


def grids(
    *,
    beta_range: tuple[float, float] = (2.0, 20.0),
    n_space: tuple[int, int] = (3, 60),
    n_time: tuple[int, int] = (1, 60),
    theta: float | None = 1.0,
    T: float = 1.0,
) -> st.SearchStrategy[GridSpec]:
    """Small grids; ``theta=None`` draws theta from [0.5, 1]."""
    thetas: st.SearchStrategy[float] = st.just(theta) if theta is not None else st.floats(0.5, 1.0, **_finite)
    return st.builds(
        GridSpec,
        beta=st.floats(*beta_range, **_finite),
        n_space=st.integers(*n_space),
        n_time=st.integers(*n_time),
        theta=thetas,
        T=st.just(T),
    )


def mc_configs(
    *,
    n_paths: tuple[int, int] = (1, 300),
    block_sizes: tuple[int, ...] = (16, 64, 256),
    **fixed: Any,
) -> st.SearchStrategy[McConfig]:
    """Short, cheap simulation configs; ``fixed`` pins any McConfig field."""
    fields: dict[str, Any] = {
        "dt": st.sampled_from([0.05, 0.02, 0.01]),
        "n_paths": st.integers(*n_paths),
        "seed": st.integers(0, 2**32 - 1),
        "block_size": st.sampled_from(block_sizes),
    }
    fields.update({k: st.just(v) for k, v in fixed.items()})
    return st.builds(McConfig, **fields)
