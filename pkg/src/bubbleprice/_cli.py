from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any

from bubbleprice._analysis import (
    BetaLadder,
    McFbetaPricer,
    McNaivePricer,
    McRebatePricer,
    PdeFbetaPricer,
    PdeRebatePricer,
    PricerStrategy,
    Reference,
    StudyResult,
    analytic_reference,
    defect_study,
    proxy_reference,
    rate_study,
)
from bubbleprice._config import (
    Command,
    Method,
    RunConfig,
    load_config,
    parse_betas,
    parse_model_spec,
    parse_payoff_spec,
    parse_rebate_spec,
)
from bubbleprice._errors import BubblePriceError, ConfigError
from bubbleprice._mc import price_fbeta, price_naive, price_rebate
from bubbleprice._pde import solve_fbeta_pde, solve_rebate_pde, surface_at
from bubbleprice._reproduce import VignetteResult, VignetteSettings, run_vignettes
from bubbleprice._svg import Series, write_svg
from bubbleprice._term import LABEL_WIDTH, bold, dim, estimate, force_color, red, status_label, status_summary, timing
from bubbleprice._util import _ensure_dir, _now_iso, _write_json

logger = logging.getLogger("bubbleprice")


# ---------------------------------------------------------------------------
# Flags
# ---------------------------------------------------------------------------


def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    p.add_argument("--config", help="JSON run configuration (schema \"1\"); flags override it")
    p.add_argument("--out", help="Output directory (default: $BUBBLEPRICE_OUT or .bubbleprice)")
    p.add_argument("--seed", type=int, help="Random seed for Monte Carlo runs")
    p.add_argument("--workers", type=int, help="Worker threads (default: available CPUs)")
    p.add_argument("--no-color", action="store_true", help="Disable ANSI colors")
    p.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    p.add_argument("-q", "--quiet", action="store_true", help="Only print the summary")
    p.add_argument("--json", action="store_true", help="Print the result object as JSON to stdout")

    p.add_argument("--method", choices=[m.value for m in Method], help="Pricing method")
    p.add_argument("--model", help="cev | power:<c>:<p>")
    p.add_argument("--payoff", help="identity | power:<gamma> | call:<K> | constant:<v>")
    p.add_argument("--rebate", help="zero | constant:<v> | power:<eta>")
    p.add_argument("--x", type=float, help="Spot price")
    p.add_argument("--t", type=float, help="Valuation time")
    p.add_argument("--T", type=float, help="Maturity")
    p.add_argument("--beta", type=float, help="Barrier level")
    p.add_argument("--betas", help="Ladder: start:stop:x<ratio> or a comma list")
    p.add_argument("--reference-beta", type=float, help="Barrier of the proxy reference solve")
    p.add_argument("--richardson", action="store_true", default=None, help="Extrapolate the defect limit")

    p.add_argument("--dt", type=float, help="Euler-Maruyama time step")
    p.add_argument("--n-paths", type=int, help="Monte Carlo paths")
    p.add_argument("--zero-handling", choices=["absorb", "extend"], help="Paths below zero")
    p.add_argument("--antithetic", action="store_true", default=None, help="Antithetic variates")
    p.add_argument("--block-size", type=int, help="Paths per random stream block")

    p.add_argument("--h", type=float, help="Space step of PDE grids")
    p.add_argument("--k", type=float, help="Time step of PDE grids (default: h)")
    p.add_argument("--theta", type=float, help="0 explicit, 0.5 Crank-Nicolson, 1 implicit")
    p.add_argument("--n-space", type=int, help="Interior space nodes (with --n-time, overrides --h/--k)")
    p.add_argument("--n-time", type=int, help="Time levels")
    return p


def _build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    p = argparse.ArgumentParser(
        prog="bubbleprice",
        description="Price European options under strict-local-martingale dynamics.",
        allow_abbrev=False,
    )
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("price", parents=[common], help="Price one claim", allow_abbrev=False)
    sub.add_parser(
        "rate-study", parents=[common], help="Fit the convergence rate over a beta ladder", allow_abbrev=False
    )
    sub.add_parser("defect-study", parents=[common], help="Estimate lim beta P(hit) over a ladder", allow_abbrev=False)
    sub.add_parser("reproduce-examples", parents=[common], help="Run the three reference vignettes", allow_abbrev=False)
    return p


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    """Flags given on the command line, as a partial config document."""
    o: dict[str, Any] = {"command": args.command}
    simple = {"out": "out", "seed": "seed", "workers": "workers", "method": "method", "x": "x", "t": "t", "T": "T"}
    simple.update({"beta": "beta", "reference_beta": "reference_beta", "richardson": "richardson"})
    for attr, key in simple.items():
        v = getattr(args, attr)
        if v is not None:
            o[key] = v
    if args.model is not None:
        o["model"] = parse_model_spec(args.model)
    if args.payoff is not None:
        o["payoff"] = parse_payoff_spec(args.payoff)
    if args.rebate is not None:
        o["rebate"] = parse_rebate_spec(args.rebate)
    if args.betas is not None:
        o["betas"] = parse_betas(args.betas)
    mc = {
        k: getattr(args, k)
        for k in ("dt", "n_paths", "zero_handling", "antithetic", "block_size")
        if getattr(args, k) is not None
    }
    if mc:
        o["mc"] = mc
    grid = {k: getattr(args, k) for k in ("h", "k", "theta", "n_space", "n_time") if getattr(args, k) is not None}
    if grid:
        o["grid"] = grid
    return o


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _price(cfg: RunConfig) -> dict[str, Any]:
    model, f, g = cfg.to_model(), cfg.to_payoff(), cfg.to_rebate()
    m = cfg.method
    if m is Method.ANALYTIC:
        ref = analytic_reference(model, f, cfg.x, cfg.t, cfg.T)
        if ref is None:
            raise ConfigError(f"no closed-form price for payoff {f.kind.value} under this model")
        return {"method": m.value, "value": ref.value, "reference": ref.label}
    if m is Method.MC_NAIVE:
        est = price_naive(model, f, cfg.to_mc())
        return {"method": m.value, "value": est.mean, **est.to_json()}
    assert cfg.beta is not None
    if m is Method.MC_REBATE:
        est = price_rebate(model, f, g, cfg.to_mc(cfg.beta))
        return {"method": m.value, "value": est.mean, "beta": cfg.beta, **est.to_json()}
    if m is Method.MC_FBETA:
        est = price_fbeta(model, f, cfg.to_mc(cfg.beta))
        return {"method": m.value, "value": est.mean, "beta": cfg.beta, **est.to_json()}
    grid = cfg.to_grid(cfg.beta)
    if m is Method.PDE_REBATE:
        surface = solve_rebate_pde(model, f, g, grid)
    else:
        surface = solve_fbeta_pde(model, f, grid)
    surface.to_csv(Path(cfg.out) / "surface.csv")
    return {
        "method": m.value,
        "value": surface_at(surface, cfg.x, cfg.t),
        "beta": cfg.beta,
        "corner_gap": surface.corner_gap,
        "grid": grid.to_json(),
    }


def _pricer(cfg: RunConfig) -> PricerStrategy:
    model, f, g = cfg.to_model(), cfg.to_payoff(), cfg.to_rebate()
    gs = cfg.grid
    m = cfg.method
    if m is Method.MC_NAIVE:
        return McNaivePricer(model, f, cfg.to_mc())
    if m is Method.MC_REBATE:
        return McRebatePricer(model, f, g, cfg.to_mc())
    if m is Method.MC_FBETA:
        return McFbetaPricer(model, f, cfg.to_mc())
    if m is Method.PDE_REBATE:
        return PdeRebatePricer(model, f, gs.h, gs.k, gs.theta, cfg.T, cfg.t, g=g)
    if m is Method.PDE_FBETA:
        return PdeFbetaPricer(model, f, gs.h, gs.k, gs.theta, cfg.T, cfg.t)
    raise ConfigError(f"method {m.value} cannot price along a ladder")


def _reference(cfg: RunConfig, pricer: PricerStrategy) -> Reference:
    ref = analytic_reference(cfg.to_model(), cfg.to_payoff(), cfg.x, cfg.t, cfg.T)
    if ref is not None:
        return ref
    if cfg.reference_beta <= cfg.betas[-1]:
        raise ConfigError("no closed-form reference; reference_beta must exceed the largest ladder level")
    return proxy_reference(pricer, cfg.reference_beta)


def _rate_study(cfg: RunConfig) -> dict[str, Any]:
    pricer = _pricer(cfg)
    ladder = BetaLadder(tuple(cfg.betas))
    study: StudyResult = rate_study(pricer, _reference(cfg, pricer), ladder, workers=cfg.workers)
    out = Path(cfg.out)
    study.write_csv(out / "study.csv")
    _write_json(out / "fit.json", study.fit)
    write_svg(
        out / "chart.svg",
        [Series(f"|V - V^beta| ({study.method})", [r.beta for r in study.rungs], study.errors)],
        title=f"Convergence in beta, fitted slope {study.fit.slope:.3f}",
        x_label="beta",
        y_label="error",
        log_x=True,
        log_y=True,
    )
    return {"method": study.method, **study.to_json()}


def _defect_study(cfg: RunConfig) -> dict[str, Any]:
    est = defect_study(
        cfg.to_model(),
        BetaLadder(tuple(cfg.betas)),
        cfg.to_mc(),
        richardson=cfg.richardson,
        workers=cfg.workers,
    )
    out = Path(cfg.out)
    est.write_csv(out / "study.csv")
    series = [Series("beta * P(hit)", est.betas, est.values)]
    if est.reference is not None:
        series.append(Series("x - E[X(T)]", est.betas, [est.reference] * len(est.betas), dashed=True))
    write_svg(out / "chart.svg", series, title="Martingale defect", x_label="beta", y_label="beta P", log_x=True)
    return est.to_json()


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _print_vignette(r: VignetteResult, *, verbose: bool) -> None:
    print(f"  {status_label(r.status)}  {bold(r.name)}{timing(r.duration_s)}")
    if verbose or r.status != "pass":
        indent = " " * (LABEL_WIDTH + 4)
        for k, v in r.details.items():
            print(f"{indent}{k}: {v}")


def _print_summary(results: list[VignetteResult], total_s: float, out_dir: str) -> None:
    summary = status_summary(r.status for r in results)
    print(f"\n{summary}  {dim(f'({total_s:.1f}s total)')}  {dim(f'results in {out_dir}/')}")


def _print_result(command: Command, result: dict[str, Any]) -> None:
    if command is Command.PRICE:
        print(estimate(result["value"], result.get("stderr")))
    elif command is Command.RATE_STUDY:
        fit = result["fit"]
        if fit["inconclusive"]:
            print(red(f"inconclusive: {fit['n_points']} usable points"))
        else:
            print(f"slope {fit['slope']:.4f}  r2 {fit['r2']:.4f}  points {fit['n_points']}")
    elif command is Command.DEFECT_STUDY:
        ref = result["reference"]
        ref_txt = f"  reference {ref:.5f}" if ref is not None else ""
        print(f"limit {result['limit']:.5f}{ref_txt}")


def run(cfg: RunConfig, *, verbose: bool = False, quiet: bool = False, json_mode: bool = False) -> int:
    out = _ensure_dir(cfg.out)
    _write_json(out / "resolved_config.json", cfg.resolved())
    t_start = time.monotonic()

    if cfg.command is Command.REPRODUCE_EXAMPLES:
        settings = VignetteSettings(seed=cfg.seed, workers=cfg.workers)

        def on_result(r: VignetteResult) -> None:
            if not json_mode and not quiet:
                _print_vignette(r, verbose=verbose)

        results = run_vignettes(settings, out_dir=str(out), on_result=on_result)
        if json_mode:
            print(json.dumps([r.to_json() for r in results], indent=2, default=str))
        else:
            _print_summary(results, time.monotonic() - t_start, str(out))
        return 1 if any(r.status in ("fail", "error") for r in results) else 0

    if cfg.command is Command.PRICE:
        result = _price(cfg)
    elif cfg.command is Command.RATE_STUDY:
        result = _rate_study(cfg)
    else:
        result = _defect_study(cfg)
    _write_json(
        out / "result.json",
        {"command": cfg.command.value, **result, "metadata": {"created": _now_iso()}},
    )
    if json_mode:
        print(json.dumps(result, indent=2, default=str))
    else:
        _print_result(cfg.command, result)
    return 0


def _setup_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    logger.handlers[:] = [handler]
    logger.setLevel(level)
    logger.propagate = False


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.no_color:
        force_color(False)
    _setup_logging(args.verbose, args.quiet or args.json)

    try:
        cfg = load_config(args.config, _overrides(args))
        return run(cfg, verbose=args.verbose, quiet=args.quiet, json_mode=args.json)
    except BubblePriceError as e:
        print(json.dumps({"error": str(e), "type": type(e).__name__}), file=sys.stderr)
        return 2 if isinstance(e, ConfigError) else 1
