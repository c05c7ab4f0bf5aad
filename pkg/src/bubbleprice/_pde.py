"""Finite differences for u_t + 1/2 sigma(x)^2 u_xx = 0 on (0, beta) x (0, T).

The theta-scheme is marched backward from the terminal datum at t = T.
With a_i = sigma(x_i)^2 k / (2 h^2) each level solves

    (1 + 2 theta a_i) u_i - theta a_i (u_{i-1} + u_{i+1})
        = (1 - 2 (1 - theta) a_i) v_i + (1 - theta) a_i (v_{i-1} + v_{i+1})

where v is the level above. Dirichlet values close the system at x = 0 and
x = beta. theta = 1 is implicit Euler, the monotone default; theta = 0.5
is Crank-Nicolson.
"""

from __future__ import annotations

import dataclasses
import enum
import logging
import math
import os
from collections.abc import Callable
from pathlib import Path
from typing import Any, TypeAlias

import numpy as np
import numpy.typing as npt
import pandas as pd

from bubbleprice._contracts import requires
from bubbleprice._errors import PostconditionError, PreconditionError, StabilityError
from bubbleprice._models import LocalVolModel
from bubbleprice._payoffs import Payoff, RebateSpec, fbeta
from bubbleprice._tridiag import is_diagonally_dominant, solve_tridiagonal
from bubbleprice._util import _now_iso, _write_json

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
TerminalDatum: TypeAlias = "Callable[[FloatArray], FloatArray] | npt.ArrayLike"

# slack for queries that land on the domain edge up to rounding
_EDGE_TOL = 1e-12


@dataclasses.dataclass(frozen=True)
class GridSpec:
    """Uniform grid on [0, beta] x [0, T]; ``n_space`` counts interior nodes.

    ``n_space`` is bumped by one when needed so that a node sits at beta/2,
    where the f^beta taper has its kink.
    """

    beta: float
    n_space: int
    n_time: int
    theta: float = 1.0
    T: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise PreconditionError(f"beta must be positive, got {self.beta}")
        if self.n_space < 3:
            raise PreconditionError(f"n_space must be at least 3, got {self.n_space}")
        if self.n_time < 1:
            raise PreconditionError(f"n_time must be positive, got {self.n_time}")
        if not (0.0 <= self.theta <= 1.0):
            raise PreconditionError(f"theta must lie in [0, 1], got {self.theta}")
        if not (math.isfinite(self.T) and self.T > 0):
            raise PreconditionError(f"maturity T must be positive, got {self.T}")
        if (self.n_space + 1) % 2:
            object.__setattr__(self, "n_space", self.n_space + 1)

    @classmethod
    def with_spacing(
        cls, beta: float, h: float, T: float = 1.0, k: float | None = None, theta: float = 1.0
    ) -> GridSpec:
        """Grid with space step close to ``h`` and time step ``k`` (default ``h``)."""
        if not (h > 0) or (k is not None and not k > 0):
            raise PreconditionError("grid steps must be positive")
        n_space = max(3, round(beta / h) - 1)
        n_time = max(1, round(T / (k if k is not None else h)))
        return cls(beta=beta, n_space=n_space, n_time=n_time, theta=theta, T=T)

    @property
    def h(self) -> float:
        return self.beta / (self.n_space + 1)

    @property
    def k(self) -> float:
        return self.T / self.n_time

    @property
    def x_nodes(self) -> FloatArray:
        return np.linspace(0.0, self.beta, self.n_space + 2)

    @property
    def t_levels(self) -> FloatArray:
        return np.linspace(0.0, self.T, self.n_time + 1)

    def stability_number(self, model: LocalVolModel) -> float:
        """max_i sigma(x_i)^2 k / h^2 over interior nodes."""
        sig = model.sigma(self.x_nodes[1:-1])
        with np.errstate(over="ignore"):
            return float(np.max(sig * sig) * self.k / (self.h * self.h))

    def check_stability(self, model: LocalVolModel) -> None:
        if self.theta >= 1.0:
            return
        bound = 1.0 / (1.0 - self.theta)
        r = self.stability_number(model)
        if not r <= bound:
            raise StabilityError(
                f"theta={self.theta} needs max sigma^2 k/h^2 <= {bound:g}, got {r:.6g}; refine the time step"
            )

    def to_json(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


class UpperKind(str, enum.Enum):
    ZERO = "zero"
    ASYMPTOTIC_IDENTITY = "asymptotic_identity"
    REBATE_CONSTANT = "rebate_constant"
    ANALYTIC = "analytic"


@dataclasses.dataclass(frozen=True)
class BoundarySpec:
    """Dirichlet data: ``lower`` at x = 0 and an upper rule at x = beta."""

    lower: float
    upper: UpperKind = UpperKind.ZERO
    value: float = 0.0
    fn: Callable[[float], float] | None = dataclasses.field(default=None, compare=False)
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "upper", UpperKind(self.upper))
        if not math.isfinite(self.lower):
            raise PreconditionError(f"lower boundary value must be finite, got {self.lower}")
        if self.upper is UpperKind.ANALYTIC and self.fn is None:
            raise PreconditionError("an analytic upper boundary needs a function of t")

    @classmethod
    def zero(cls, lower: float = 0.0) -> BoundarySpec:
        return cls(lower, UpperKind.ZERO)

    @classmethod
    def asymptotic_identity(cls, lower: float = 0.0) -> BoundarySpec:
        return cls(lower, UpperKind.ASYMPTOTIC_IDENTITY)

    @classmethod
    def rebate_constant(cls, lower: float, value: float) -> BoundarySpec:
        return cls(lower, UpperKind.REBATE_CONSTANT, value=value)

    @classmethod
    def analytic(cls, lower: float, fn: Callable[[float], float], label: str = "") -> BoundarySpec:
        return cls(lower, UpperKind.ANALYTIC, fn=fn, label=label)

    def upper_value(self, beta: float, t: float) -> float:
        if self.upper is UpperKind.ZERO:
            return 0.0
        if self.upper is UpperKind.ASYMPTOTIC_IDENTITY:
            return beta
        if self.upper is UpperKind.REBATE_CONSTANT:
            return self.value
        assert self.fn is not None
        return float(self.fn(t))

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"lower": self.lower, "upper": self.upper.value}
        if self.upper is UpperKind.REBATE_CONSTANT:
            out["value"] = self.value
        elif self.upper is UpperKind.ANALYTIC:
            out["label"] = self.label
        return out


def _bracket(nodes: FloatArray, q: float) -> tuple[int, float]:
    """Index i and weight w with q = (1 - w) nodes[i] + w nodes[i + 1]."""
    q = min(max(q, float(nodes[0])), float(nodes[-1]))
    i = int(np.searchsorted(nodes, q, side="right")) - 1
    i = min(max(i, 0), nodes.size - 2)
    span = nodes[i + 1] - nodes[i]
    return i, float((q - nodes[i]) / span) if span > 0 else 0.0


@dataclasses.dataclass(frozen=True, eq=False)
class PriceSurface:
    """Solved values, one row per stored time level and one column per space node.

    Rows follow ``t_levels`` in increasing time; the last row is the
    terminal datum. Columns include both boundary nodes.
    """

    grid: GridSpec
    boundary: BoundarySpec
    values: FloatArray
    t_levels: FloatArray
    corner_gap: float
    model: LocalVolModel | None = None

    @property
    def x_nodes(self) -> FloatArray:
        return self.grid.x_nodes

    def _check_x(self, x: float) -> None:
        if not (-_EDGE_TOL <= x <= self.grid.beta * (1 + _EDGE_TOL)):
            raise PreconditionError(f"x={x} lies outside [0, {self.grid.beta}]")

    def _check_t(self, t: float) -> None:
        if not (-_EDGE_TOL <= t <= self.grid.T * (1 + _EDGE_TOL)):
            raise PreconditionError(f"t={t} lies outside [0, {self.grid.T}]")

    def column(self, x: float) -> FloatArray:
        """Values along the stored time levels at ``x``, linear between nodes."""
        self._check_x(x)
        i, w = _bracket(self.x_nodes, x)
        return (1.0 - w) * self.values[:, i] + w * self.values[:, i + 1]

    def row(self, t: float) -> FloatArray:
        """Values over the space nodes at time ``t``, linear between stored levels."""
        self._check_t(t)
        j, w = _bracket(self.t_levels, t)
        return (1.0 - w) * self.values[j] + w * self.values[j + 1]

    def to_frame(self) -> pd.DataFrame:
        cols = [f"{x:.17g}" for x in self.x_nodes]
        frame = pd.DataFrame(self.values, columns=cols)
        frame.insert(0, "t", self.t_levels)
        return frame

    def to_csv(self, path: str | os.PathLike[str]) -> Path:
        """Write the surface and a ``<stem>.meta.json`` sidecar next to it."""
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(p, index=False, float_format="%.17g")
        meta = {
            "grid": self.grid,
            "boundary": self.boundary,
            "model": self.model,
            "corner_gap": self.corner_gap,
            "created": _now_iso(),
        }
        _write_json(p.with_name(p.stem + ".meta.json"), meta)
        return p


def _terminal_values(terminal: TerminalDatum, x: FloatArray) -> FloatArray:
    if callable(terminal):
        out = np.asarray(terminal(x), dtype=np.float64)
    else:
        out = np.asarray(terminal, dtype=np.float64)
    if out.shape != x.shape:
        raise PreconditionError(f"terminal datum has shape {out.shape}, grid needs {x.shape}")
    if not np.all(np.isfinite(out)):
        raise PreconditionError("terminal datum must be finite at every node")
    return out.copy()


def _stored_levels(n_time: int, stride: int) -> list[int]:
    levels = list(range(0, n_time + 1, stride))
    if levels[-1] != n_time:
        levels.append(n_time)
    return levels


def solve(
    model: LocalVolModel,
    terminal: TerminalDatum,
    boundary: BoundarySpec,
    grid: GridSpec,
    *,
    time_stride: int = 1,
) -> PriceSurface:
    """Solve the terminal-boundary problem on ``grid``.

    ``terminal`` is a function of the node array or the sampled values. The
    terminal row owns both corners; boundary columns are imposed at every
    earlier level. Only every ``time_stride``-th level (plus t = T) is kept.
    """
    if time_stride < 1:
        raise PreconditionError(f"time_stride must be positive, got {time_stride}")
    grid.check_stability(model)
    x = grid.x_nodes
    t = grid.t_levels
    u = _terminal_values(terminal, x)
    if not math.isclose(u[0], boundary.lower, rel_tol=1e-12, abs_tol=1e-12):
        raise PreconditionError(f"lower boundary {boundary.lower} must equal the terminal datum at 0, {u[0]}")

    theta = grid.theta
    n = grid.n_space
    sig = model.sigma(x[1:-1])
    with np.errstate(over="ignore"):
        a = 0.5 * sig * sig * grid.k / (grid.h * grid.h)
    if not np.all(np.isfinite(a)):
        raise StabilityError("sigma^2 k / h^2 overflows on this grid")

    lower_band = np.concatenate(([0.0], -theta * a[1:]))
    upper_band = np.concatenate((-theta * a[:-1], [0.0]))
    diag = 1.0 + 2.0 * theta * a
    if not is_diagonally_dominant(lower_band, diag, upper_band):
        raise PostconditionError("implicit matrix is not diagonally dominant")
    explicit_centre = 1.0 - 2.0 * (1.0 - theta) * a
    explicit_side = (1.0 - theta) * a

    stored = _stored_levels(grid.n_time, time_stride)
    slot = {lvl: i for i, lvl in enumerate(stored)}
    values = np.empty((len(stored), n + 2), dtype=np.float64)
    values[slot[grid.n_time]] = u

    upper_near_T = u[-1]
    for level in range(grid.n_time - 1, -1, -1):
        up = boundary.upper_value(grid.beta, float(t[level]))
        rhs = explicit_centre * u[1:-1]
        if theta < 1.0:
            rhs += explicit_side * (u[:-2] + u[2:])
        rhs[0] += theta * a[0] * boundary.lower
        rhs[-1] += theta * a[-1] * up
        interior = solve_tridiagonal(lower_band, diag, upper_band, rhs)
        u = np.concatenate(([boundary.lower], interior, [up]))
        if level == grid.n_time - 1:
            upper_near_T = up
        if level in slot:
            values[slot[level]] = u

    values.setflags(write=False)
    t_stored = t[stored]
    t_stored.setflags(write=False)
    corner_gap = abs(float(values[-1, -1]) - upper_near_T)
    logger.debug(
        "solved beta=%g on %d x %d nodes, theta=%g, corner gap %.3g",
        grid.beta,
        n + 2,
        grid.n_time + 1,
        theta,
        corner_gap,
    )
    return PriceSurface(grid, boundary, values, t_stored, corner_gap, model)


def _corner_gap(f_beta: float, upper_at_T: float) -> float:
    return abs(f_beta - upper_at_T)


def solve_rebate_pde(model: LocalVolModel, f: Payoff, g: RebateSpec, grid: GridSpec, **kw: Any) -> PriceSurface:
    """Terminal f, u(beta, t) = g(beta); the corner at (beta, T) may be discontinuous."""
    rebate = float(g(grid.beta))
    surface = solve(model, f, BoundarySpec.rebate_constant(f.at_zero(), rebate), grid, **kw)
    return dataclasses.replace(surface, corner_gap=_corner_gap(float(f(grid.beta)), rebate))


def solve_fbeta_pde(model: LocalVolModel, f: Payoff, grid: GridSpec, **kw: Any) -> PriceSurface:
    """Terminal f^beta with zero upper boundary; continuous at the corner for every f."""
    return solve(model, lambda x: fbeta(f, grid.beta, x), BoundarySpec.zero(f.at_zero()), grid, **kw)


def solve_naive_pde(model: LocalVolModel, f: Payoff, grid: GridSpec, **kw: Any) -> PriceSurface:
    """Terminal f with the asymptotic boundary u(beta, t) = beta.

    For f(x) = x this returns u = x at every node, whatever sigma is.
    """
    return solve(model, f, BoundarySpec.asymptotic_identity(f.at_zero()), grid, **kw)


def solve_truncated_pde(
    model: LocalVolModel,
    f: Payoff,
    phi: Callable[[float, float], float],
    grid: GridSpec,
    *,
    label: str = "",
    **kw: Any,
) -> PriceSurface:
    """Terminal f with u(beta, t) = phi(beta, t): the truncated value function."""
    beta = grid.beta
    boundary = BoundarySpec.analytic(f.at_zero(), lambda t: phi(beta, t), label=label or "phi")
    return solve(model, f, boundary, grid, **kw)


def _in_domain(surface: PriceSurface, x: float, t: float) -> bool:
    g = surface.grid
    return -_EDGE_TOL <= x <= g.beta * (1 + _EDGE_TOL) and -_EDGE_TOL <= t <= g.T * (1 + _EDGE_TOL)


@requires(lambda surface, x, t: _in_domain(surface, x, t), "(x, t) inside [0, beta] x [0, T]")
def surface_at(surface: PriceSurface, x: float, t: float) -> float:
    """Bilinear interpolation of the stored surface at (x, t)."""
    i, wx = _bracket(surface.x_nodes, x)
    j, wt = _bracket(surface.t_levels, t)
    v = surface.values
    lo = (1.0 - wx) * v[j, i] + wx * v[j, i + 1]
    hi = (1.0 - wx) * v[j + 1, i] + wx * v[j + 1, i + 1]
    return float((1.0 - wt) * lo + wt * hi)
