"""Euler-Maruyama simulation with discrete barrier monitoring.

The scheme is X_{n+1} = X_n + sigma(X_n) (W_{n+1} - W_n) on a uniform grid
of ``n_steps`` steps over [t0, T]. A barrier is monitored at the grid
times strictly before T; a path that reaches it is frozen and its payoff
is settled by the rebate. Paths are simulated in blocks of
``McConfig.block_size`` with one counter-based stream per block, so the
estimates are identical for any number of workers.
"""

from __future__ import annotations

import dataclasses
import enum
import logging
import math
import os
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from typing import Any

import numpy as np
import numpy.typing as npt

from bubbleprice._contracts import requires
from bubbleprice._errors import BubblePriceError, PreconditionError
from bubbleprice._models import LocalVolModel
from bubbleprice._numeric import binomial_stderr, mean_and_stderr
from bubbleprice._payoffs import Payoff, RebateSpec, fbeta
from bubbleprice._rng import block_layout, path_stream

logger = logging.getLogger(__name__)

OVERFLOW_LIMIT = 1e300
# normals drawn per chunk of time steps, per block
_CHUNK_ELEMS = 1 << 21

FloatArray = npt.NDArray[np.float64]
BoundaryFn = Callable[[FloatArray, FloatArray], FloatArray]


class ZeroHandling(str, enum.Enum):
    ABSORB_AT_ZERO = "absorb"
    EXTEND_PAYOFF = "extend"


@dataclasses.dataclass(frozen=True)
class McConfig:
    dt: float
    n_paths: int
    seed: int = 0
    T: float = 1.0
    t0: float = 0.0
    barrier_beta: float | None = None
    zero_handling: ZeroHandling = ZeroHandling.ABSORB_AT_ZERO
    antithetic: bool = False
    block_size: int = 4096
    workers: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "zero_handling", ZeroHandling(self.zero_handling))
        if not (self.T > self.t0):
            raise PreconditionError(f"maturity T={self.T} must exceed start time t0={self.t0}")
        if not (self.dt > 0 and self.dt < self.T - self.t0):
            raise PreconditionError(f"time step dt={self.dt} must lie in (0, T - t0)")
        if self.n_paths <= 0 or self.block_size <= 0:
            raise PreconditionError("n_paths and block_size must be positive")
        if self.barrier_beta is not None and not (self.barrier_beta > 0 and math.isfinite(self.barrier_beta)):
            raise PreconditionError(f"barrier must be a positive finite level, got {self.barrier_beta}")
        if self.antithetic and (self.n_paths % 2 or self.block_size % 2):
            raise PreconditionError("antithetic sampling needs an even n_paths and block_size")
        if self.workers is not None and self.workers <= 0:
            raise PreconditionError("workers must be positive")

    @property
    def n_steps(self) -> int:
        return max(1, round((self.T - self.t0) / self.dt))

    @property
    def step(self) -> float:
        """Effective step: the horizon split into ``n_steps`` equal pieces."""
        return (self.T - self.t0) / self.n_steps

    def with_barrier(self, beta: float | None) -> McConfig:
        return dataclasses.replace(self, barrier_beta=beta)

    def to_json(self) -> dict[str, Any]:
        out = dataclasses.asdict(self)
        out["zero_handling"] = self.zero_handling.value
        return out


@dataclasses.dataclass(frozen=True)
class PathOutcome:
    hit: bool
    terminal_value: float
    hit_step: int | None
    overflow: bool = False


@dataclasses.dataclass(frozen=True)
class PathBatch:
    """Outcomes of a block of paths; ``hit_step`` is -1 for paths that never hit."""

    hit: npt.NDArray[np.bool_]
    terminal: FloatArray
    hit_step: npt.NDArray[np.int64]
    overflow: npt.NDArray[np.bool_]

    def __len__(self) -> int:
        return int(self.terminal.size)

    def outcome(self, i: int) -> PathOutcome:
        step = int(self.hit_step[i])
        return PathOutcome(
            hit=bool(self.hit[i]),
            terminal_value=float(self.terminal[i]),
            hit_step=step if step >= 0 else None,
            overflow=bool(self.overflow[i]),
        )


@dataclasses.dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_paths: int
    hit_fraction: float = 0.0
    overflow_count: int = 0
    rebate_leakage: float = 0.0

    def to_json(self) -> dict[str, Any]:
        return {
            "mean": self.mean,
            "stderr": self.std_error,
            "n": self.n_paths,
            "hit_frac": self.hit_fraction,
            "overflow_count": self.overflow_count,
            "rebate_leakage": self.rebate_leakage,
        }


def _draws(rng: np.random.Generator, m: int, n: int, antithetic: bool) -> FloatArray:
    if antithetic and n >= 2:
        half = rng.standard_normal((m, n // 2))
        return np.concatenate([half, -half], axis=1)
    return rng.standard_normal((m, n))


def simulate_block(model: LocalVolModel, cfg: McConfig, stream: np.random.Generator, n_paths: int) -> PathBatch:
    """Simulate ``n_paths`` paths from ``stream``; increments are drawn row-major per step.

    The stream is consumed identically whatever the barrier, which makes runs
    at different barriers with one seed common-random-number experiments.
    """
    n_steps = cfg.n_steps
    sqrt_dt = math.sqrt(cfg.step)
    beta = cfg.barrier_beta
    absorb = cfg.zero_handling is ZeroHandling.ABSORB_AT_ZERO
    sigma = model.sigma if absorb else model.sigma_even

    x = np.full(n_paths, model.x0, dtype=np.float64)
    active = np.ones(n_paths, dtype=bool)
    hit = np.zeros(n_paths, dtype=bool)
    overflow = np.zeros(n_paths, dtype=bool)
    hit_step = np.full(n_paths, -1, dtype=np.int64)

    chunk = max(1, min(n_steps, _CHUNK_ELEMS // max(n_paths, 1)))
    step = 0
    with np.errstate(over="ignore", invalid="ignore"):
        while step < n_steps and active.any():
            m = min(chunk, n_steps - step)
            z = _draws(rng=stream, m=m, n=n_paths, antithetic=cfg.antithetic)
            for j in range(m):
                step += 1
                xn = x + sigma(x) * (z[j] * sqrt_dt)
                if absorb:
                    xn = np.maximum(xn, 0.0)
                finite = np.abs(xn) <= OVERFLOW_LIMIT
                blown_up = ~finite & ~(xn < 0.0)
                overflow |= active & ~finite
                x = np.where(active & finite, xn, x)
                if beta is not None:
                    # the barrier is watched strictly before maturity; an
                    # overflow at the last step has certainly crossed it too
                    # and is booked at the last watched step
                    reached = blown_up if step == n_steps else blown_up | (finite & (xn >= beta))
                    crossed = active & reached
                    hit |= crossed
                    hit_step[crossed] = min(step, n_steps - 1)
                    active &= ~crossed
                active &= finite
                if absorb:
                    active &= x > 0.0
                if not active.any():
                    break

    return PathBatch(hit=hit, terminal=x, hit_step=hit_step, overflow=overflow)


def simulate_path(model: LocalVolModel, cfg: McConfig, stream: np.random.Generator) -> PathOutcome:
    _check_barrier(model, cfg)
    single = dataclasses.replace(cfg, antithetic=False)
    return simulate_block(model, single, stream, 1).outcome(0)


def _check_barrier(model: LocalVolModel, cfg: McConfig) -> None:
    if cfg.barrier_beta is not None and not cfg.barrier_beta > model.x0:
        raise PreconditionError(f"barrier beta={cfg.barrier_beta} must exceed the initial price x0={model.x0}")


def _block_results(
    model: LocalVolModel,
    cfg: McConfig,
    reduce: Callable[[PathBatch], FloatArray],
    *,
    exclude_overflow: bool = False,
) -> tuple[FloatArray, int, int, int]:
    """Per-path samples in path order, plus hit and overflow counts and the path count.

    With ``exclude_overflow`` the samples of overflowed paths are left out
    (with antithetic variates, the whole pair).
    """
    layout = block_layout(cfg.n_paths, cfg.block_size)

    def work(item: tuple[int, int]) -> tuple[FloatArray, int, int]:
        block, n = item
        batch = simulate_block(model, cfg, path_stream(cfg.seed, block), n)
        samples = reduce(batch)
        keep = ~batch.overflow
        if cfg.antithetic:
            half = n // 2
            samples = 0.5 * (samples[:half] + samples[half:])
            keep = keep[:half] & keep[half:]
        if exclude_overflow:
            samples = samples[keep]
        logger.debug("block %d: %d paths, %d hits", block, n, int(batch.hit.sum()))
        return samples, int(batch.hit.sum()), int(batch.overflow.sum())

    workers = min(cfg.workers or os.cpu_count() or 1, len(layout))
    if workers <= 1:
        parts = [work(item) for item in layout]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, layout))

    samples = np.concatenate([p[0] for p in parts])
    hits = sum(p[1] for p in parts)
    overflows = sum(p[2] for p in parts)
    if overflows:
        fate = "left out of the estimate" if exclude_overflow else "frozen"
        logger.warning("%d of %d paths exceeded %.0e and were %s", overflows, cfg.n_paths, OVERFLOW_LIMIT, fate)
    return samples, hits, overflows, cfg.n_paths


def _estimate(
    model: LocalVolModel,
    cfg: McConfig,
    reduce: Callable[[PathBatch], FloatArray],
    *,
    exclude_overflow: bool = False,
) -> McEstimate:
    samples, hits, overflows, n = _block_results(model, cfg, reduce, exclude_overflow=exclude_overflow)
    if samples.size == 0:
        raise BubblePriceError(f"all {n} paths exceeded {OVERFLOW_LIMIT:.0e}; no estimate is possible")
    mean, se = mean_and_stderr(samples)
    return McEstimate(mean=mean, std_error=se, n_paths=n, hit_fraction=hits / n, overflow_count=overflows)


def _has_no_barrier(cfg: McConfig) -> bool:
    return cfg.barrier_beta is None


def _has_barrier_above(model: LocalVolModel, cfg: McConfig) -> bool:
    return cfg.barrier_beta is not None and cfg.barrier_beta > model.x0


@requires(lambda model, f, cfg: _has_no_barrier(cfg), "naive pricing runs without a barrier")
def price_naive(model: LocalVolModel, f: Payoff, cfg: McConfig) -> McEstimate:
    """Plain Euler-Maruyama estimate of E[f(X(T))].

    For a strict local martingale this converges to the wrong value: the
    discrete chain is a true martingale, so f = identity returns x0.
    Paths that overflow are left out of the mean and reported in
    ``overflow_count``.
    """
    return _estimate(model, cfg, lambda batch: f(batch.terminal), exclude_overflow=True)


@requires(lambda model, f, g, cfg: _has_barrier_above(model, cfg), "barrier beta > x0")
def price_rebate(model: LocalVolModel, f: Payoff, g: RebateSpec, cfg: McConfig) -> McEstimate:
    """E[g(beta) 1{hit} + f(X(T)) 1{no hit}] under discrete monitoring."""
    assert cfg.barrier_beta is not None
    rebate = float(g(cfg.barrier_beta))
    est = _estimate(model, cfg, lambda batch: np.where(batch.hit, rebate, f(batch.terminal)))
    return dataclasses.replace(est, rebate_leakage=rebate * est.hit_fraction)


@requires(lambda model, f, cfg: _has_barrier_above(model, cfg), "barrier beta > x0")
def price_fbeta(model: LocalVolModel, f: Payoff, cfg: McConfig) -> McEstimate:
    """E[f^beta(X(T)) 1{no hit}]: the zero-rebate option on the tapered payoff."""
    beta = cfg.barrier_beta
    assert beta is not None
    return _estimate(model, cfg, lambda batch: np.where(batch.hit, 0.0, fbeta(f, beta, batch.terminal)))


@requires(lambda model, f, phi, cfg: _has_barrier_above(model, cfg), "barrier beta > x0")
def price_truncated(model: LocalVolModel, f: Payoff, phi: BoundaryFn, cfg: McConfig) -> McEstimate:
    """Truncated value E[phi(beta, tau) 1{hit} + f(X(T)) 1{no hit}].

    ``phi`` is called with arrays of barrier levels and hit times, always at
    times before T.
    """
    beta = cfg.barrier_beta
    assert beta is not None

    def reduce(batch: PathBatch) -> FloatArray:
        out = f(batch.terminal)
        if batch.hit.any():
            t_hit = cfg.t0 + batch.hit_step[batch.hit] * cfg.step
            out[batch.hit] = phi(np.full(t_hit.shape, beta), t_hit)
        return out

    return _estimate(model, cfg, reduce)


@requires(lambda model, cfg: _has_barrier_above(model, cfg), "barrier beta > x0")
def hitting_probability(model: LocalVolModel, cfg: McConfig) -> McEstimate:
    """Fraction of paths reaching the barrier before T, with a binomial standard error."""
    samples, hits, overflows, n = _block_results(model, cfg, lambda batch: batch.hit.astype(np.float64))
    if cfg.antithetic:
        mean, se = mean_and_stderr(samples)
    else:
        mean = hits / n
        se = binomial_stderr(mean, n)
    return McEstimate(mean=mean, std_error=se, n_paths=n, hit_fraction=hits / n, overflow_count=overflows)
