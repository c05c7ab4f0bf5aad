"""Beta ladders, convergence-rate fits and the martingale-defect study.

A study evaluates one pricing method on each rung of a ladder of barrier
levels, compares it with a reference price and fits
log |error| = intercept + slope * log beta by least squares.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import os
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Protocol

import numpy as np
import pandas as pd
from sortedcontainers import SortedDict

from bubbleprice._errors import PreconditionError
from bubbleprice._mc import McConfig, McEstimate, hitting_probability, price_fbeta, price_naive, price_rebate
from bubbleprice._models import (
    LocalVolModel,
    MartingaleClass,
    cev_expectation,
    cev_price,
    classify_martingale,
    martingale_defect,
)
from bubbleprice._payoffs import Payoff, PayoffKind, RebateSpec
from bubbleprice._pde import GridSpec, solve_fbeta_pde, solve_rebate_pde, surface_at

logger = logging.getLogger(__name__)

STUDY_COLUMNS = ["beta", "price", "error", "stderr", "hit_frac", "beta_times_hitprob"]

# errors below this many standard errors are treated as noise
NOISE_FLOOR_SIGMAS = 3.0
MIN_FIT_POINTS = 3
MIN_LADDER_POINTS = 4


# ---------------------------------------------------------------------------
# Ladders and fits
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class BetaLadder:
    betas: tuple[float, ...]

    def __post_init__(self) -> None:
        betas = tuple(float(b) for b in self.betas)
        object.__setattr__(self, "betas", betas)
        if not betas:
            raise PreconditionError("a beta ladder needs at least one rung")
        if not all(math.isfinite(b) and b > 0 for b in betas):
            raise PreconditionError(f"ladder levels must be positive and finite: {betas}")
        if any(b1 >= b2 for b1, b2 in zip(betas, betas[1:])):
            raise PreconditionError(f"ladder levels must be strictly increasing: {betas}")

    @classmethod
    def geometric(cls, start: float, stop: float, ratio: float = 2.0) -> BetaLadder:
        """start, start * ratio, ... up to ``stop`` inclusive."""
        if not (start > 0 and ratio > 1 and stop >= start):
            raise PreconditionError("geometric ladder needs 0 < start <= stop and ratio > 1")
        betas = []
        b = float(start)
        while b <= stop * (1 + 1e-12):
            betas.append(b)
            b *= ratio
        return cls(tuple(betas))

    def check_above(self, x: float) -> None:
        if self.betas[0] <= x:
            raise PreconditionError(f"every ladder level must exceed the query price x={x}; got {self.betas[0]}")

    def __len__(self) -> int:
        return len(self.betas)

    def to_json(self) -> list[float]:
        return list(self.betas)


@dataclasses.dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    n_points: int
    dropped_points: tuple[float, ...] = ()
    inconclusive: bool = False

    def to_json(self) -> dict[str, Any]:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r2": self.r_squared,
            "n_points": self.n_points,
            "dropped_points": list(self.dropped_points),
            "inconclusive": self.inconclusive,
        }


def fit_rate(
    betas: Sequence[float],
    errors: Sequence[float],
    stderrs: Sequence[float] | None = None,
) -> RateFit:
    """Least-squares slope of log error against log beta.

    Points with a nonpositive error, or an error within
    ``NOISE_FLOOR_SIGMAS`` standard errors of zero, are dropped. Fewer than
    ``MIN_FIT_POINTS`` usable points give an inconclusive fit.
    """
    b = np.asarray(betas, dtype=np.float64)
    e = np.asarray(errors, dtype=np.float64)
    if b.shape != e.shape:
        raise PreconditionError("betas and errors must have the same length")
    keep = np.isfinite(e) & (e > 0)
    if stderrs is not None:
        se = np.asarray(stderrs, dtype=np.float64)
        keep &= ~(e <= NOISE_FLOOR_SIGMAS * np.nan_to_num(se, nan=0.0))
    dropped = tuple(float(v) for v in b[~keep])
    n = int(keep.sum())
    if n < MIN_FIT_POINTS:
        return RateFit(math.nan, math.nan, math.nan, n, dropped, inconclusive=True)

    lx = np.log(b[keep])
    ly = np.log(e[keep])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return RateFit(float(slope), float(intercept), min(max(r2, 0.0), 1.0), n, dropped)


# ---------------------------------------------------------------------------
# Pricers and references
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class RungPrice:
    beta: float
    price: float
    stderr: float = 0.0
    hit_fraction: float | None = None


class PricerStrategy(Protocol):
    @property
    def label(self) -> str: ...

    @property
    def x(self) -> float: ...

    @property
    def t(self) -> float: ...

    def price(self, beta: float) -> RungPrice: ...


def _from_mc(beta: float, est: McEstimate, with_hits: bool = True) -> RungPrice:
    return RungPrice(beta, est.mean, est.std_error, est.hit_fraction if with_hits else None)


@dataclasses.dataclass(frozen=True)
class McNaivePricer:
    """Plain simulation; ignores beta, so every rung shows the same price."""

    model: LocalVolModel
    f: Payoff
    cfg: McConfig
    label: str = "mc-naive"

    @property
    def x(self) -> float:
        return self.model.x0

    @property
    def t(self) -> float:
        return self.cfg.t0

    def price(self, beta: float) -> RungPrice:
        return _from_mc(beta, price_naive(self.model, self.f, self.cfg.with_barrier(None)), with_hits=False)


@dataclasses.dataclass(frozen=True)
class McRebatePricer:
    model: LocalVolModel
    f: Payoff
    g: RebateSpec
    cfg: McConfig
    label: str = "mc-rebate"

    @property
    def x(self) -> float:
        return self.model.x0

    @property
    def t(self) -> float:
        return self.cfg.t0

    def price(self, beta: float) -> RungPrice:
        return _from_mc(beta, price_rebate(self.model, self.f, self.g, self.cfg.with_barrier(beta)))


@dataclasses.dataclass(frozen=True)
class McFbetaPricer:
    model: LocalVolModel
    f: Payoff
    cfg: McConfig
    label: str = "mc-fbeta"

    @property
    def x(self) -> float:
        return self.model.x0

    @property
    def t(self) -> float:
        return self.cfg.t0

    def price(self, beta: float) -> RungPrice:
        return _from_mc(beta, price_fbeta(self.model, self.f, self.cfg.with_barrier(beta)))


@dataclasses.dataclass(frozen=True)
class _PdePricer:
    """Solves on a grid of fixed spacing ``h`` (and ``k``) at every rung."""

    model: LocalVolModel
    f: Payoff
    h: float
    k: float | None = None
    theta: float = 1.0
    T: float = 1.0
    t_query: float = 0.0

    @property
    def x(self) -> float:
        return self.model.x0

    @property
    def t(self) -> float:
        return self.t_query

    def grid(self, beta: float) -> GridSpec:
        return GridSpec.with_spacing(beta, self.h, self.T, self.k, self.theta)

    def _stride(self, grid: GridSpec) -> int:
        # only t = 0 and t = T are kept when the query sits at t = 0
        return grid.n_time if self.t_query == 0.0 else 1


@dataclasses.dataclass(frozen=True)
class PdeRebatePricer(_PdePricer):
    g: RebateSpec = dataclasses.field(default_factory=RebateSpec.zero)
    label: str = "pde-rebate"

    def price(self, beta: float) -> RungPrice:
        grid = self.grid(beta)
        surface = solve_rebate_pde(self.model, self.f, self.g, grid, time_stride=self._stride(grid))
        return RungPrice(beta, surface_at(surface, self.x, self.t))


@dataclasses.dataclass(frozen=True)
class PdeFbetaPricer(_PdePricer):
    label: str = "pde-fbeta"

    def price(self, beta: float) -> RungPrice:
        grid = self.grid(beta)
        surface = solve_fbeta_pde(self.model, self.f, grid, time_stride=self._stride(grid))
        return RungPrice(beta, surface_at(surface, self.x, self.t))


@dataclasses.dataclass(frozen=True)
class Reference:
    value: float
    proxy: bool = False
    label: str = "analytic"

    def to_json(self) -> dict[str, Any]:
        return {"value": self.value, "proxy": self.proxy, "label": self.label}


def analytic_reference(model: LocalVolModel, f: Payoff, x: float, t: float, T: float) -> Reference | None:
    """Exact price when one is known: any CEV payoff, X(T) under a true martingale, constants."""
    if f.kind is PayoffKind.CONSTANT:
        return Reference(f.value, label="constant")
    if model.is_cev:
        if f.kind is PayoffKind.IDENTITY:
            return Reference(float(cev_price(x, t, T)), label="cev_price")
        return Reference(cev_expectation(f, x, t, T), label="cev_bessel")
    if f.kind is PayoffKind.IDENTITY and classify_martingale(model) is MartingaleClass.TRUE_MARTINGALE:
        return Reference(float(x), label="martingale")
    return None


def proxy_reference(pricer: PricerStrategy, beta: float) -> Reference:
    """Price at a far barrier standing in for the unknown limit."""
    rung = pricer.price(beta)
    logger.info("proxy reference at beta=%g: %.10g", beta, rung.price)
    return Reference(rung.price, proxy=True, label=f"{pricer.label}@{beta:g}")


# ---------------------------------------------------------------------------
# Studies
# ---------------------------------------------------------------------------


def _run_rungs(
    fn: Callable[[float], Any],
    betas: Sequence[float],
    workers: int | None,
) -> SortedDict:
    results: SortedDict = SortedDict()
    n = min(workers or os.cpu_count() or 1, len(betas))
    if n <= 1:
        for b in betas:
            results[b] = fn(b)
        return results
    with ThreadPoolExecutor(max_workers=n) as pool:
        for b, r in zip(betas, pool.map(fn, betas)):
            results[b] = r
    return results


@dataclasses.dataclass(frozen=True)
class StudyResult:
    method: str
    reference: Reference
    rungs: tuple[RungPrice, ...]
    fit: RateFit

    @property
    def errors(self) -> list[float]:
        return [abs(r.price - self.reference.value) for r in self.rungs]

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for r, err in zip(self.rungs, self.errors):
            hit = math.nan if r.hit_fraction is None else r.hit_fraction
            rows.append(
                {
                    "beta": r.beta,
                    "price": r.price,
                    "error": err,
                    "stderr": r.stderr,
                    "hit_frac": hit,
                    "beta_times_hitprob": r.beta * hit,
                }
            )
        return pd.DataFrame(rows, columns=STUDY_COLUMNS)

    def write_csv(self, path: str | os.PathLike[str]) -> Path:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(p, index=False, float_format="%.17g")
        return p

    def to_json(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "reference": self.reference.to_json(),
            "fit": self.fit.to_json(),
            "rungs": [dataclasses.asdict(r) for r in self.rungs],
        }


def rate_study(
    pricer: PricerStrategy,
    oracle: Reference,
    ladder: BetaLadder,
    *,
    workers: int | None = None,
) -> StudyResult:
    """Price every rung, measure |price - oracle| and fit the decay rate."""
    if len(ladder) < MIN_LADDER_POINTS:
        raise PreconditionError(f"a rate study needs at least {MIN_LADDER_POINTS} ladder points, got {len(ladder)}")
    ladder.check_above(pricer.x)

    def one(beta: float) -> RungPrice:
        rung = pricer.price(beta)
        logger.info(
            "%s beta=%g price=%.10g error=%.3g",
            pricer.label,
            beta,
            rung.price,
            abs(rung.price - oracle.value),
        )
        return rung

    table = _run_rungs(one, ladder.betas, workers)
    rungs = tuple(table.values())
    errors = [abs(r.price - oracle.value) for r in rungs]
    fit = fit_rate(list(table.keys()), errors, [r.stderr for r in rungs])
    if fit.inconclusive:
        logger.warning("rate fit inconclusive: %d usable points", fit.n_points)
    return StudyResult(pricer.label, oracle, rungs, fit)


@dataclasses.dataclass(frozen=True)
class DefectEstimate:
    """beta * P(hit before T) per rung, its limit and the defect it should approach."""

    betas: tuple[float, ...]
    values: tuple[float, ...]
    stderrs: tuple[float, ...]
    hit_fractions: tuple[float, ...]
    limit: float
    reference: float | None
    richardson: bool = False

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "beta": self.betas,
                "hit_frac": self.hit_fractions,
                "stderr": self.stderrs,
                "beta_times_hitprob": self.values,
            }
        )

    def write_csv(self, path: str | os.PathLike[str]) -> Path:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(p, index=False, float_format="%.17g")
        return p

    def to_json(self) -> dict[str, Any]:
        return {
            "betas": list(self.betas),
            "values": list(self.values),
            "stderrs": list(self.stderrs),
            "limit": self.limit,
            "reference": self.reference,
            "richardson": self.richardson,
        }


def defect_reference(model: LocalVolModel, t: float = 0.0, T: float = 1.0) -> float | None:
    if model.is_cev:
        return float(martingale_defect(model.x0, t, T))
    if classify_martingale(model) is MartingaleClass.TRUE_MARTINGALE:
        return 0.0
    return None


def defect_study(
    model: LocalVolModel,
    ladder: BetaLadder,
    cfg: McConfig,
    *,
    richardson: bool = False,
    workers: int | None = None,
) -> DefectEstimate:
    """Estimate lim beta P(hit) from the ladder's largest rung.

    With ``richardson`` the two largest rungs b1 < b2 are combined assuming
    beta P = L + C / beta, i.e. L = (b2 v2 - b1 v1) / (b2 - b1).
    """
    ladder.check_above(model.x0)
    if richardson and len(ladder) < 2:
        raise PreconditionError("Richardson extrapolation needs at least two rungs")

    def one(beta: float) -> McEstimate:
        est = hitting_probability(model, cfg.with_barrier(beta))
        logger.info("defect beta=%g hit=%.6g beta*P=%.6g", beta, est.mean, beta * est.mean)
        return est

    table = _run_rungs(one, ladder.betas, workers)
    betas = tuple(float(b) for b in table.keys())
    ests: list[McEstimate] = list(table.values())
    values = tuple(b * e.mean for b, e in zip(betas, ests))
    if richardson:
        b1, b2 = betas[-2], betas[-1]
        v1, v2 = values[-2], values[-1]
        limit = (b2 * v2 - b1 * v1) / (b2 - b1)
    else:
        limit = values[-1]
    return DefectEstimate(
        betas=betas,
        values=values,
        stderrs=tuple(b * e.std_error for b, e in zip(betas, ests)),
        hit_fractions=tuple(e.mean for e in ests),
        limit=limit,
        reference=defect_reference(model, cfg.t0, cfg.T),
        richardson=richardson,
    )


@dataclasses.dataclass(frozen=True)
class CrossCheckReport:
    mc_mean: float
    mc_stderr: float
    pde_value: float
    analytic: float | None
    mc_pde_gap: float
    mc_analytic_gap: float | None
    pde_analytic_gap: float | None
    tolerance: float
    consistent: bool

    def to_json(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


def cross_check(
    mc_result: McEstimate,
    pde_value: float,
    analytic: float | None = None,
    *,
    pde_tolerance: float = 0.0,
) -> CrossCheckReport:
    """Pairwise gaps; MC and PDE agree when |mc - pde| <= 3 stderr + pde_tolerance."""
    gap = abs(mc_result.mean - pde_value)
    tol = NOISE_FLOOR_SIGMAS * mc_result.std_error + pde_tolerance
    return CrossCheckReport(
        mc_mean=mc_result.mean,
        mc_stderr=mc_result.std_error,
        pde_value=pde_value,
        analytic=analytic,
        mc_pde_gap=gap,
        mc_analytic_gap=None if analytic is None else abs(mc_result.mean - analytic),
        pde_analytic_gap=None if analytic is None else abs(pde_value - analytic),
        tolerance=tol,
        consistent=gap <= tol,
    )
