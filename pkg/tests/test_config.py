"""Tests for run configuration loading, validation and spec strings."""

from __future__ import annotations

import json

import pytest

from bubbleprice import ConfigError, GridSpec, LocalVolModel, Payoff, RebateSpec, ZeroHandling, load_config
from bubbleprice._config import (
    Command,
    Method,
    parse_betas,
    parse_model_spec,
    parse_payoff_spec,
    parse_rebate_spec,
)


def _write(tmp_path, obj):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(obj))
    return path


# ---------------------------------------------------------------------------
# Loading and merging
# ---------------------------------------------------------------------------

class TestLoadConfig:
    def test_defaults(self):
        cfg = load_config()
        assert cfg.command is Command.PRICE
        assert cfg.method is Method.ANALYTIC
        assert cfg.to_model() == LocalVolModel.cev()
        assert cfg.to_payoff() == Payoff.identity()
        assert cfg.to_rebate() == RebateSpec.zero()
        assert cfg.betas == [8.0, 16.0, 32.0, 64.0, 128.0]
        assert cfg.out == ".bubbleprice"

    def test_out_from_environment(self, monkeypatch):
        monkeypatch.setenv("BUBBLEPRICE_OUT", "/tmp/elsewhere")
        assert load_config().out == "/tmp/elsewhere"

    def test_file_then_overrides(self, tmp_path):
        path = _write(tmp_path, {"schema": "1", "seed": 4, "mc": {"dt": 0.01, "n_paths": 10}})
        cfg = load_config(path, {"mc": {"n_paths": 20}, "x": 2.0})
        assert (cfg.mc.dt, cfg.mc.n_paths, cfg.seed, cfg.x) == (0.01, 20, 4, 2.0)

    def test_resolved_uses_schema_key(self):
        out = load_config().resolved()
        assert out["schema"] == "1"
        assert "schema_version" not in out
        assert out["method"] == "analytic"

    def test_resolved_round_trips(self, tmp_path):
        cfg = load_config(None, {"method": "mc-rebate", "beta": 4.0, "payoff": {"kind": "call", "strike": 1.0}})
        again = load_config(_write(tmp_path, cfg.resolved()))
        assert again == cfg

    @pytest.mark.parametrize(
        ("data", "fragment"),
        [
            ({"bogus": 1}, "bogus"),
            ({"schema": "2"}, "schema"),
            ({"mc": {"dt": -1.0}}, "mc.dt"),
            ({"method": "mc-rebate"}, "needs a barrier"),
            ({"method": "pde-fbeta", "beta": 1.0}, "must exceed x"),
            ({"command": "rate-study", "method": "analytic"}, "barrier method"),
            ({"command": "rate-study", "method": "mc-fbeta", "betas": [1.0, 2.0, 4.0, 8.0]}, "exceed x"),
            ({"betas": [4.0, 2.0]}, "strictly increasing"),
            ({"t": 1.0}, "before maturity"),
            ({"payoff": {"kind": "power", "gamma": 2.0}}, "gamma"),
            ({"grid": {"theta": 1.5}}, "grid.theta"),
        ],
    )
    def test_invalid(self, tmp_path, data, fragment):
        with pytest.raises(ConfigError, match="invalid configuration") as info:
            load_config(_write(tmp_path, data))
        assert fragment in str(info.value)

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read config"):
            load_config(tmp_path / "missing.json")

    def test_bad_json(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="cannot read config"):
            load_config(path)

    def test_not_an_object(self, tmp_path):
        with pytest.raises(ConfigError, match="JSON object"):
            load_config(_write(tmp_path, [1, 2]))


# ---------------------------------------------------------------------------
# Domain objects
# ---------------------------------------------------------------------------

class TestDomainObjects:
    def test_to_mc(self):
        cfg = load_config(None, {"seed": 9, "t": 0.5, "workers": 2, "mc": {"zero_handling": "extend", "dt": 0.01}})
        mc = cfg.to_mc(3.0)
        assert mc.barrier_beta == 3.0
        assert mc.t0 == 0.5
        assert mc.seed == 9
        assert mc.workers == 2
        assert mc.zero_handling is ZeroHandling.EXTEND_PAYOFF
        assert cfg.to_mc().barrier_beta is None

    def test_to_grid_from_spacing(self):
        cfg = load_config(None, {"grid": {"h": 0.1, "k": 0.01}})
        assert cfg.to_grid(10.0) == GridSpec(beta=10.0, n_space=99, n_time=100)

    def test_to_grid_from_counts(self):
        cfg = load_config(None, {"grid": {"n_space": 9, "n_time": 7, "theta": 0.5}})
        assert cfg.to_grid(5.0) == GridSpec(beta=5.0, n_space=9, n_time=7, theta=0.5)

    def test_method_flags(self):
        assert Method.PDE_REBATE.needs_barrier
        assert not Method.MC_NAIVE.needs_barrier
        assert Method.MC_FBETA.is_mc
        assert not Method.ANALYTIC.is_mc


# ---------------------------------------------------------------------------
# Spec strings
# ---------------------------------------------------------------------------

class TestSpecStrings:
    def test_models(self):
        assert parse_model_spec("cev") == {"kind": "power", "c": 1.0, "p": 2.0}
        assert parse_model_spec("power:0.5:1.5") == {"kind": "power", "c": 0.5, "p": 1.5}

    @pytest.mark.parametrize("spec", ["cev:1", "power:1", "power:a:b", "sabr"])
    def test_bad_models(self, spec):
        with pytest.raises(ConfigError):
            parse_model_spec(spec)

    def test_payoffs(self):
        assert parse_payoff_spec("identity") == {"kind": "identity"}
        assert parse_payoff_spec("call:2") == {"kind": "call", "strike": 2.0}
        assert parse_payoff_spec("power:0.5") == {"kind": "power", "gamma": 0.5}
        assert parse_payoff_spec("constant:3") == {"kind": "constant", "value": 3.0}

    def test_bad_payoff(self):
        with pytest.raises(ConfigError):
            parse_payoff_spec("put:1")

    def test_rebates(self):
        assert parse_rebate_spec("zero") == {"kind": "zero"}
        assert parse_rebate_spec("power:0.5") == {"kind": "power", "eta": 0.5}
        with pytest.raises(ConfigError):
            parse_rebate_spec("constant")

    def test_geometric_ladder(self):
        assert parse_betas("8:128:x2") == [8.0, 16.0, 32.0, 64.0, 128.0]

    def test_list_ladder(self):
        assert parse_betas("2, 4,8") == [2.0, 4.0, 8.0]

    @pytest.mark.parametrize("spec", ["8:128", "8:128:2", "8:4:x2", "8:128:x1", "", "2,a"])
    def test_bad_ladders(self, spec):
        with pytest.raises(ConfigError):
            parse_betas(spec)
