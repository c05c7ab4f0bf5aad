"""Run configuration for the command line: schema, spec strings and merging.

A run is described by one JSON document (schema version "1"). Values come
from the built-in defaults, then a ``--config`` file, then flags; each
flag maps to exactly one key of the document.
"""

from __future__ import annotations

import enum
import json
import os
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveFloat, PositiveInt, ValidationError
from pydantic import model_validator

from bubbleprice._errors import ConfigError
from bubbleprice._mc import McConfig, ZeroHandling
from bubbleprice._models import LocalVolModel
from bubbleprice._payoffs import Payoff, RebateSpec
from bubbleprice._pde import GridSpec

OUT_ENV = "BUBBLEPRICE_OUT"
DEFAULT_OUT = ".bubbleprice"


def default_out_dir() -> str:
    return os.environ.get(OUT_ENV) or DEFAULT_OUT


class Command(str, enum.Enum):
    PRICE = "price"
    RATE_STUDY = "rate-study"
    DEFECT_STUDY = "defect-study"
    REPRODUCE_EXAMPLES = "reproduce-examples"


class Method(str, enum.Enum):
    MC_NAIVE = "mc-naive"
    MC_REBATE = "mc-rebate"
    MC_FBETA = "mc-fbeta"
    PDE_REBATE = "pde-rebate"
    PDE_FBETA = "pde-fbeta"
    ANALYTIC = "analytic"

    @property
    def needs_barrier(self) -> bool:
        return self in (Method.MC_REBATE, Method.MC_FBETA, Method.PDE_REBATE, Method.PDE_FBETA)

    @property
    def is_mc(self) -> bool:
        return self.value.startswith("mc-")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelSettings(_Strict):
    kind: Literal["power"] = "power"
    c: PositiveFloat = 1.0
    p: NonNegativeFloat = 2.0


class PayoffSettings(_Strict):
    kind: Literal["identity", "power", "call", "constant"] = "identity"
    gamma: float | None = None
    strike: float | None = None
    value: float | None = None


class RebateSettings(_Strict):
    kind: Literal["zero", "constant", "power"] = "zero"
    value: float | None = None
    eta: float | None = None


class McSettings(_Strict):
    dt: PositiveFloat = 1e-3
    n_paths: PositiveInt = 100_000
    zero_handling: Literal["absorb", "extend"] = "absorb"
    antithetic: bool = False
    block_size: PositiveInt = 4096


class GridSettings(_Strict):
    h: PositiveFloat = 0.01
    k: PositiveFloat | None = None
    theta: float = Field(1.0, ge=0.0, le=1.0)
    n_space: PositiveInt | None = None
    n_time: PositiveInt | None = None


class RunConfig(_Strict):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    schema_version: Literal["1"] = Field("1", alias="schema")
    command: Command = Command.PRICE
    method: Method = Method.ANALYTIC
    model: ModelSettings = Field(default_factory=ModelSettings)
    payoff: PayoffSettings = Field(default_factory=PayoffSettings)
    rebate: RebateSettings = Field(default_factory=RebateSettings)
    x: PositiveFloat = 1.0
    t: NonNegativeFloat = 0.0
    T: PositiveFloat = 1.0
    beta: PositiveFloat | None = None
    betas: list[PositiveFloat] = Field(default_factory=lambda: [8.0, 16.0, 32.0, 64.0, 128.0])
    reference_beta: PositiveFloat = 512.0
    richardson: bool = False
    mc: McSettings = Field(default_factory=McSettings)
    grid: GridSettings = Field(default_factory=GridSettings)
    seed: int = Field(0, ge=0, lt=2**64)
    workers: PositiveInt | None = None
    out: str = Field(default_factory=default_out_dir)

    @model_validator(mode="after")
    def _method_requirements(self) -> RunConfig:
        if self.t >= self.T:
            raise ValueError(f"t={self.t} must be before maturity T={self.T}")
        if any(b1 >= b2 for b1, b2 in zip(self.betas, self.betas[1:])):
            raise ValueError("betas must be strictly increasing")
        if self.command is Command.PRICE and self.method.needs_barrier:
            if self.beta is None:
                raise ValueError(f"method {self.method.value} needs a barrier: set beta")
            if self.beta <= self.x:
                raise ValueError(f"barrier beta={self.beta} must exceed x={self.x}")
        if self.command is Command.RATE_STUDY:
            if not self.method.needs_barrier:
                raise ValueError(f"rate-study needs a barrier method, got {self.method.value}")
            if self.betas and self.betas[0] <= self.x:
                raise ValueError("every ladder level must exceed x")
        # domain validation errors are ValueErrors and surface as schema errors
        self.to_model()
        self.to_payoff()
        self.to_rebate()
        return self

    # -- domain objects -----------------------------------------------------

    def to_model(self) -> LocalVolModel:
        return LocalVolModel(c=self.model.c, p=self.model.p, x0=self.x, kind=self.model.kind)

    def to_payoff(self) -> Payoff:
        return Payoff.from_json(self.payoff.model_dump(exclude_none=True))

    def to_rebate(self) -> RebateSpec:
        return RebateSpec.from_json(self.rebate.model_dump(exclude_none=True))

    def to_mc(self, beta: float | None = None) -> McConfig:
        return McConfig(
            dt=self.mc.dt,
            n_paths=self.mc.n_paths,
            seed=self.seed,
            T=self.T,
            t0=self.t,
            barrier_beta=beta,
            zero_handling=ZeroHandling(self.mc.zero_handling),
            antithetic=self.mc.antithetic,
            block_size=self.mc.block_size,
            workers=self.workers,
        )

    def to_grid(self, beta: float) -> GridSpec:
        g = self.grid
        if g.n_space is not None and g.n_time is not None:
            return GridSpec(beta=beta, n_space=g.n_space, n_time=g.n_time, theta=g.theta, T=self.T)
        return GridSpec.with_spacing(beta, g.h, self.T, g.k, g.theta)

    def resolved(self) -> dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True)


# ---------------------------------------------------------------------------
# Spec strings used by flags
# ---------------------------------------------------------------------------


def _floats(spec: str, parts: list[str], n: int) -> list[float]:
    if len(parts) != n:
        raise ConfigError(f"malformed spec {spec!r}")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"malformed number in spec {spec!r}") from None


def parse_model_spec(spec: str) -> dict[str, Any]:
    """``cev`` or ``power:<c>:<p>``."""
    head, *rest = spec.strip().lower().split(":")
    if head == "cev" and not rest:
        return {"kind": "power", "c": 1.0, "p": 2.0}
    if head == "power":
        c, p = _floats(spec, rest, 2)
        return {"kind": "power", "c": c, "p": p}
    raise ConfigError(f"unknown model spec {spec!r}; use 'cev' or 'power:<c>:<p>'")


def parse_payoff_spec(spec: str) -> dict[str, Any]:
    """``identity``, ``power:<gamma>``, ``call:<K>`` or ``constant:<v>``."""
    head, *rest = spec.strip().lower().split(":")
    if head == "identity" and not rest:
        return {"kind": "identity"}
    fields = {"power": "gamma", "call": "strike", "constant": "value"}
    if head in fields:
        (v,) = _floats(spec, rest, 1)
        return {"kind": head, fields[head]: v}
    raise ConfigError(f"unknown payoff spec {spec!r}")


def parse_rebate_spec(spec: str) -> dict[str, Any]:
    """``zero``, ``constant:<v>`` or ``power:<eta>``."""
    head, *rest = spec.strip().lower().split(":")
    if head == "zero" and not rest:
        return {"kind": "zero"}
    fields = {"constant": "value", "power": "eta"}
    if head in fields:
        (v,) = _floats(spec, rest, 1)
        return {"kind": head, fields[head]: v}
    raise ConfigError(f"unknown rebate spec {spec!r}")


def parse_betas(spec: str) -> list[float]:
    """``start:stop:x<ratio>`` for a geometric ladder, or a comma list."""
    s = spec.strip()
    if ":" in s:
        parts = s.split(":")
        if len(parts) != 3 or not parts[2].lower().startswith("x"):
            raise ConfigError(f"malformed ladder {spec!r}; use start:stop:x<ratio>")
        start, stop, ratio = _floats(spec, [parts[0], parts[1], parts[2][1:]], 3)
        if not (start > 0 and stop >= start and ratio > 1):
            raise ConfigError(f"ladder {spec!r} needs 0 < start <= stop and ratio > 1")
        out = []
        b = start
        while b <= stop * (1 + 1e-12):
            out.append(b)
            b *= ratio
        return out
    parts = [p for p in s.split(",") if p.strip()]
    if not parts:
        raise ConfigError("empty beta ladder")
    return _floats(spec, parts, len(parts))


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


def _merge(base: dict[str, Any], over: dict[str, Any]) -> dict[str, Any]:
    out = dict(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def load_config(path: str | os.PathLike[str] | None = None, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Validate defaults < file at ``path`` < ``overrides``."""
    data: dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
    if overrides:
        data = _merge(data, overrides)
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(_describe(e)) from None


def _describe(err: ValidationError) -> str:
    parts = []
    for item in err.errors(include_url=False):
        loc = ".".join(str(p) for p in item.get("loc", ())) or "config"
        parts.append(f"{loc}: {item.get('msg', 'invalid')}")
    return "invalid configuration: " + "; ".join(parts)
