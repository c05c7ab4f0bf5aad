"""Tests for the reference vignettes."""

from __future__ import annotations

import json

import pytest

from bubbleprice import PreconditionError
from bubbleprice._reproduce import VIGNETTES, VignetteResult, VignetteSettings, naive_em, naive_fdm, run_vignettes

SMALL = VignetteSettings(
    mc_dt=0.05,
    mc_paths=2000,
    naive_beta=10.0,
    naive_n_space=99,
    naive_n_time=50,
    fbeta_beta=20.0,
    fbeta_n_space=399,
    fbeta_n_time=400,
    fbeta_tol=0.1,
)


class TestVignettes:
    def test_naive_fdm_is_exactly_linear(self):
        details = naive_fdm(SMALL)
        assert details["passed"]
        assert details["value_at_1"] == pytest.approx(1.0, abs=1e-9)
        assert details["true_price"] == pytest.approx(0.6826894921370859)

    def test_run_all(self, tmp_path):
        seen: list[VignetteResult] = []
        results = run_vignettes(SMALL, out_dir=str(tmp_path), on_result=seen.append)
        assert [r.name for r in results] == list(VIGNETTES)
        assert seen == results
        assert all(r.status in ("pass", "fail", "inconclusive") for r in results)
        assert all("passed" not in r.details for r in results)
        doc = json.loads((tmp_path / "result.json").read_text())
        assert doc["command"] == "reproduce-examples"
        assert doc["metadata"]["settings"]["mc_paths"] == 2000
        assert len(doc["vignettes"]) == 3

    def test_fbeta_pipeline_lands_below_price(self):
        details = VIGNETTES["fbeta_pde_recovers_price"](SMALL)
        assert details["value"] < details["true_price"]
        assert details["corner_gap"] == 0.0

    def test_naive_em_says_whether_its_error_is_small_enough(self):
        details = naive_em(SMALL)
        assert details["informative"] == (4.0 * details["stderr"] < 1.0 - details["true_price"])
        assert details["overflow_count"] >= 0

    @pytest.mark.parametrize(
        ("details", "status"),
        [
            ({"passed": True}, "pass"),
            ({"passed": False}, "fail"),
            ({"passed": True, "informative": False}, "inconclusive"),
            ({"passed": False, "informative": False}, "fail"),
        ],
    )
    def test_noisy_vignettes_are_inconclusive(self, monkeypatch, details, status):
        monkeypatch.setattr("bubbleprice._reproduce.VIGNETTES", {"noisy": lambda s: dict(details)})
        (result,) = run_vignettes(SMALL)
        assert result.status == status
        assert "passed" not in result.details

    def test_library_errors_become_error_status(self, monkeypatch):
        def broken(settings):
            raise PreconditionError("bad grid")

        monkeypatch.setitem(VIGNETTES, "broken", broken)
        results = run_vignettes(SMALL)
        last = results[-1]
        assert last.name == "broken"
        assert last.status == "error"
        assert last.details == {"error": "PreconditionError: bad grid"}

    def test_result_json(self):
        r = VignetteResult("x", "pass", {"value": 1.0}, duration_s=0.12345)
        assert r.to_json() == {"name": "x", "status": "pass", "details": {"value": 1.0}, "duration_s": 0.123}
