"""Terminal payoffs f, rebate functions g and the f^beta taper.

Every payoff is evaluated on the whole real line: below zero it takes the
value f(0), which lets simulated paths that cross zero share one payoff
code path with paths absorbed at zero.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from typing import Any

import numpy as np
import numpy.typing as npt

from bubbleprice._contracts import ensures, requires
from bubbleprice._errors import PreconditionError


class PayoffKind(str, enum.Enum):
    IDENTITY = "identity"
    POWER = "power"
    CALL = "call"
    CONSTANT = "constant"


class RebateKind(str, enum.Enum):
    ZERO = "zero"
    CONSTANT = "constant"
    POWER = "power"


def _check_real(name: str, value: float, *, lo: float, hi: float = math.inf, lo_open: bool = False) -> None:
    ok = math.isfinite(value) and (value > lo if lo_open else value >= lo) and value <= hi
    if not ok:
        bound = f"({lo}, {hi}]" if lo_open else f"[{lo}, {hi}]"
        raise PreconditionError(f"{name} must lie in {bound}, got {value}")


@dataclasses.dataclass(frozen=True)
class Payoff:
    """Continuous nonnegative terminal payoff with growth exponent ``growth_gamma``."""

    kind: PayoffKind
    gamma: float = 1.0
    strike: float = 0.0
    value: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", PayoffKind(self.kind))
        if self.kind is PayoffKind.POWER:
            _check_real("payoff exponent gamma", self.gamma, lo=0.0, hi=1.0)
        elif self.kind is PayoffKind.CALL:
            _check_real("call strike", self.strike, lo=0.0, lo_open=True)
        elif self.kind is PayoffKind.CONSTANT:
            _check_real("constant payoff value", self.value, lo=0.0)

    @classmethod
    def identity(cls) -> Payoff:
        return cls(PayoffKind.IDENTITY)

    @classmethod
    def power(cls, gamma: float) -> Payoff:
        return cls(PayoffKind.POWER, gamma=gamma)

    @classmethod
    def call(cls, strike: float) -> Payoff:
        return cls(PayoffKind.CALL, strike=strike)

    @classmethod
    def constant(cls, value: float) -> Payoff:
        return cls(PayoffKind.CONSTANT, value=value)

    @property
    def growth_gamma(self) -> float:
        if self.kind is PayoffKind.POWER:
            return self.gamma
        if self.kind is PayoffKind.CONSTANT:
            return 0.0
        return 1.0

    def __call__(self, x: npt.ArrayLike) -> npt.NDArray[np.float64]:
        xs = np.maximum(np.asarray(x, dtype=np.float64), 0.0)
        if self.kind is PayoffKind.IDENTITY:
            return xs
        if self.kind is PayoffKind.POWER:
            # 0**0 == 1, consistent with the constant payoff
            with np.errstate(over="ignore"):
                return np.power(xs, self.gamma)
        if self.kind is PayoffKind.CALL:
            return np.maximum(xs - self.strike, 0.0)
        return np.full_like(xs, self.value)

    def at_zero(self) -> float:
        return float(self(0.0))

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind.value}
        if self.kind is PayoffKind.POWER:
            out["gamma"] = self.gamma
        elif self.kind is PayoffKind.CALL:
            out["strike"] = self.strike
        elif self.kind is PayoffKind.CONSTANT:
            out["value"] = self.value
        return out

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> Payoff:
        try:
            kind = PayoffKind(obj["kind"])
        except (KeyError, ValueError):
            raise PreconditionError(f"payoff JSON has no valid kind: {obj!r}") from None
        fields = {k: float(obj[k]) for k in ("gamma", "strike", "value") if k in obj}
        return cls(kind, **fields)


@dataclasses.dataclass(frozen=True)
class RebateSpec:
    """Rebate g paid when the barrier is hit, with growth exponent ``growth_eta``."""

    kind: RebateKind
    value: float = 0.0
    eta: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", RebateKind(self.kind))
        if self.kind is RebateKind.CONSTANT:
            _check_real("constant rebate value", self.value, lo=0.0)
        elif self.kind is RebateKind.POWER:
            _check_real("rebate exponent eta", self.eta, lo=0.0, hi=1.0)

    @classmethod
    def zero(cls) -> RebateSpec:
        return cls(RebateKind.ZERO)

    @classmethod
    def constant(cls, value: float) -> RebateSpec:
        return cls(RebateKind.CONSTANT, value=value)

    @classmethod
    def power(cls, eta: float) -> RebateSpec:
        return cls(RebateKind.POWER, eta=eta)

    @property
    def growth_eta(self) -> float:
        return self.eta if self.kind is RebateKind.POWER else 0.0

    @property
    def is_sublinear(self) -> bool:
        """g(x)/x -> 0; the hypothesis under which rebate prices converge for every model."""
        return self.growth_eta < 1.0

    def __call__(self, beta: npt.ArrayLike) -> npt.NDArray[np.float64]:
        b = np.asarray(beta, dtype=np.float64)
        if self.kind is RebateKind.ZERO:
            return np.zeros_like(b)
        if self.kind is RebateKind.CONSTANT:
            return np.full_like(b, self.value)
        return np.power(b, self.eta)

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind.value}
        if self.kind is RebateKind.CONSTANT:
            out["value"] = self.value
        elif self.kind is RebateKind.POWER:
            out["eta"] = self.eta
        return out

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> RebateSpec:
        try:
            kind = RebateKind(obj["kind"])
        except (KeyError, ValueError):
            raise PreconditionError(f"rebate JSON has no valid kind: {obj!r}") from None
        fields = {k: float(obj[k]) for k in ("value", "eta") if k in obj}
        return cls(kind, **fields)


def rate_exponent(f: Payoff, g: RebateSpec | None = None) -> float:
    """Theoretical decay exponent 1 - max(gamma, eta) of |V - V^beta|."""
    eta = g.growth_eta if g is not None else 0.0
    return 1.0 - max(f.growth_gamma, eta)


def payoff_eval(f: Payoff, x: float) -> float:
    return float(f(x))


def fbeta(f: Payoff, beta: float, x: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """f^beta on the real line: f up to beta/2, tapered linearly to 0 at beta, 0 beyond."""
    xs = np.asarray(x, dtype=np.float64)
    fx = f(xs)
    taper = 2.0 * fx * (beta - xs) / beta
    out = np.where(xs <= 0.5 * beta, fx, taper)
    return np.where(xs > beta, 0.0, out)


@ensures(lambda f, beta, x, result: result >= 0.0, "f^beta >= 0")
@requires(lambda f, beta, x: beta > 0, "beta > 0")
@requires(lambda f, beta, x: 0.0 <= x <= beta, "0 <= x <= beta")
def truncate_payoff(f: Payoff, beta: float, x: float) -> float:
    return float(fbeta(f, beta, x))


@requires(lambda g, beta: beta > 0, "beta > 0")
def rebate_eval(g: RebateSpec, beta: float) -> float:
    return float(g(beta))
