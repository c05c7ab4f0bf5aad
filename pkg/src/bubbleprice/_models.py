"""Local-volatility models dX = sigma(X) dW and the closed-form CEV oracles.

The model family is the power law sigma(x) = c * x**p with sigma(0) = 0.
For c = 1, p = 2 (the CEV example dX = X^2 dW) the price of the claim
f(x) = x is known in closed form; that formula, its one-parameter family
of spurious PDE solutions and the martingale defect are provided here as
oracles for the numerical schemes.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from collections.abc import Callable
from typing import Any

import numpy as np
import numpy.typing as npt
from scipy import integrate, special

from bubbleprice._contracts import ensures, requires
from bubbleprice._errors import PreconditionError

ArrayOrFloat = Any  # float or ndarray; results broadcast like numpy

_SQRT2 = math.sqrt(2.0)


class MartingaleClass(str, enum.Enum):
    TRUE_MARTINGALE = "true_martingale"
    STRICT_LOCAL_MARTINGALE = "strict_local_martingale"


@dataclasses.dataclass(frozen=True)
class LocalVolModel:
    """Power-law volatility sigma(x) = c * x**p started at ``x0``."""

    c: float
    p: float
    x0: float = 1.0
    kind: str = "power"

    def __post_init__(self) -> None:
        if self.kind != "power":
            raise PreconditionError(f"unknown model kind {self.kind!r}; only 'power' is supported")
        if not (math.isfinite(self.c) and self.c > 0):
            raise PreconditionError(f"volatility scale c must be positive, got {self.c}")
        if not (math.isfinite(self.p) and self.p >= 0):
            raise PreconditionError(f"volatility exponent p must be nonnegative, got {self.p}")
        if not (math.isfinite(self.x0) and self.x0 > 0):
            raise PreconditionError(f"initial price x0 must be positive, got {self.x0}")

    @classmethod
    def cev(cls, x0: float = 1.0) -> LocalVolModel:
        return cls(c=1.0, p=2.0, x0=x0)

    @classmethod
    def power(cls, c: float, p: float, x0: float = 1.0) -> LocalVolModel:
        return cls(c=c, p=p, x0=x0)

    @property
    def is_cev(self) -> bool:
        return self.c == 1.0 and self.p == 2.0

    def with_x0(self, x0: float) -> LocalVolModel:
        return dataclasses.replace(self, x0=x0)

    def sigma(self, x: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """Vectorised sigma on x >= 0; zero at the origin for every p."""
        xs = np.asarray(x, dtype=np.float64)
        return np.where(xs > 0.0, self._power(np.maximum(xs, 0.0)), 0.0)

    def sigma_even(self, x: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """sigma(|x|): the extension used when simulated paths are allowed below zero."""
        xs = np.abs(np.asarray(x, dtype=np.float64))
        return np.where(xs > 0.0, self._power(xs), 0.0)

    def _power(self, xs: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        # c * xs**p on xs >= 0; integer exponents skip np.power
        with np.errstate(over="ignore", invalid="ignore"):
            if self.p == 2.0:
                return self.c * xs * xs
            if self.p == 1.0:
                return self.c * xs
            return self.c * np.power(xs, self.p)

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind, "c": self.c, "p": self.p, "x0": self.x0}

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> LocalVolModel:
        try:
            return cls(kind=str(obj.get("kind", "power")), c=float(obj["c"]), p=float(obj["p"]), x0=float(obj["x0"]))
        except KeyError as e:
            raise PreconditionError(f"model JSON is missing field {e.args[0]!r}") from None


@requires(lambda model, x: bool(np.all(np.asarray(x) >= 0)), "x >= 0")
def sigma_eval(model: LocalVolModel, x: float) -> float:
    return float(model.sigma(x))


def uniqueness_integral_diverges(model: LocalVolModel) -> bool:
    """Whether int_1^inf x / sigma(x)^2 dx diverges.

    For sigma = c x^p the integrand is c^-2 x^(1-2p), which diverges exactly
    when 1 - 2p >= -1.
    """
    return model.p <= 1.0


def classify_martingale(model: LocalVolModel) -> MartingaleClass:
    if uniqueness_integral_diverges(model):
        return MartingaleClass.TRUE_MARTINGALE
    return MartingaleClass.STRICT_LOCAL_MARTINGALE


def norm_cdf(z: ArrayOrFloat) -> ArrayOrFloat:
    """Standard normal CDF through erfc, accurate in both tails."""
    out = 0.5 * special.erfc(-np.asarray(z, dtype=np.float64) / _SQRT2)
    return float(out) if np.ndim(out) == 0 else out


def _cev_domain(x: ArrayOrFloat, t: ArrayOrFloat, T: float) -> bool:
    return bool(np.all(np.asarray(x) > 0) and np.all(np.asarray(t) < T) and np.all(np.asarray(t) >= 0))


def _cev_argument(x: ArrayOrFloat, t: ArrayOrFloat, T: float) -> npt.NDArray[np.float64]:
    # a / sqrt(2) with a = 1 / (x sqrt(T - t))
    xs = np.asarray(x, dtype=np.float64)
    tau = T - np.asarray(t, dtype=np.float64)
    return 1.0 / (xs * np.sqrt(2.0 * tau))


def _scalar_or_array(out: npt.NDArray[np.float64]) -> ArrayOrFloat:
    return float(out) if np.ndim(out) == 0 else out


@ensures(
    lambda x, t, T, result: bool(np.all(np.asarray(result) >= 0) and np.all(np.asarray(result) <= np.asarray(x))),
    "0 <= price <= x",
)
@requires(lambda x, t, T: _cev_domain(x, t, T), "x > 0 and 0 <= t < T")
def cev_price(x: ArrayOrFloat, t: ArrayOrFloat, T: float) -> ArrayOrFloat:
    """Price of the claim X(T) under dX = X^2 dW: x (1 - 2 Phi(-1 / (x sqrt(T - t))))."""
    return _scalar_or_array(np.asarray(x, dtype=np.float64) * special.erf(_cev_argument(x, t, T)))


@requires(lambda x, t, T, lam: _cev_domain(x, t, T), "x > 0 and 0 <= t < T")
@requires(lambda x, t, T, lam: lam >= 0, "lambda >= 0")
def cev_family(x: ArrayOrFloat, t: ArrayOrFloat, T: float, lam: float) -> ArrayOrFloat:
    """x (1 - lam Phi(-1 / (x sqrt(T - t)))): a solution of the CEV pricing PDE for every lam.

    lam = 2 is the price, lam = 0 the trivial solution x, lam > 2 solutions
    that are unbounded below.
    """
    xs = np.asarray(x, dtype=np.float64)
    tail = 0.5 * special.erfc(_cev_argument(x, t, T))
    return _scalar_or_array(xs * (1.0 - lam * tail))


@ensures(lambda x, t, T, result: bool(np.all(np.asarray(result) >= 0)), "defect >= 0")
@requires(lambda x, t, T: _cev_domain(x, t, T), "x > 0 and 0 <= t < T")
def martingale_defect(x: ArrayOrFloat, t: ArrayOrFloat, T: float) -> ArrayOrFloat:
    """x - E[X(T)] for the CEV model, i.e. 2 x Phi(-1 / (x sqrt(T - t)))."""
    return _scalar_or_array(np.asarray(x, dtype=np.float64) * special.erfc(_cev_argument(x, t, T)))


def _bessel3_density(r: float, r0: float, tau: float) -> float:
    """Transition density of the 3-dimensional Bessel process from r0 over time tau."""
    s = math.sqrt(tau)
    return (r / (r0 * s * math.sqrt(2.0 * math.pi))) * (
        math.exp(-((r - r0) ** 2) / (2.0 * tau)) - math.exp(-((r + r0) ** 2) / (2.0 * tau))
    )


@requires(lambda f, x, t, T: _cev_domain(x, t, T), "x > 0 and 0 <= t < T")
def cev_expectation(f: Callable[[float], float], x: float, t: float, T: float) -> float:
    """E_{x,t}[f(X(T))] under dX = X^2 dW for a payoff of at most linear growth.

    X is the reciprocal of a 3-dimensional Bessel process started at 1/x, so
    the expectation is a one-dimensional integral against its density. For
    f(x) = x this reproduces :func:`cev_price`.
    """
    r0 = 1.0 / x
    tau = T - t
    s = math.sqrt(tau)

    def integrand(r: float) -> float:
        return float(f(1.0 / r)) * _bessel3_density(r, r0, tau) if r > 0.0 else 0.0

    # the density lives within a few standard deviations of r0
    hi = r0 + 12.0 * s
    knots = sorted({max(r0 - 6.0 * s, 0.0), r0, r0 + 6.0 * s} - {0.0})
    body, _ = integrate.quad(integrand, 0.0, hi, points=knots, limit=400, epsabs=1e-13, epsrel=1e-11)
    tail, _ = integrate.quad(integrand, hi, np.inf, limit=200, epsabs=1e-13)
    return float(body + tail)
