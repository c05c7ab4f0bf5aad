"""Tests for terminal formatting."""

from __future__ import annotations

import pytest

from bubbleprice._term import LABEL_WIDTH, estimate, force_color, status_label, status_summary, supports_color


class TestColor:
    def test_no_color_env(self, monkeypatch):
        force_color(None)
        monkeypatch.setenv("NO_COLOR", "1")
        assert supports_color() is False

    def test_forced_on_wraps_in_escape_codes(self):
        force_color(True)
        assert status_label("pass").endswith("\033[32mPASS\033[0m")


class TestStatus:
    @pytest.mark.parametrize("status", ["pass", "fail", "error", "inconclusive"])
    def test_labels_are_right_aligned(self, status):
        label = status_label(status)
        assert len(label) == LABEL_WIDTH
        assert label.strip() == label.strip().upper()

    def test_unknown_status_is_shown_upper_case(self):
        assert status_label("skip").strip() == "SKIP"

    def test_summary_order_and_counts(self):
        assert status_summary(["fail", "pass", "inconclusive", "pass"]) == "2 passed, 1 inconclusive, 1 failed"
        assert status_summary(["error"]) == "1 errored"
        assert status_summary([]) == "nothing run"


class TestEstimate:
    def test_closed_form(self):
        assert estimate(0.6826894921370859) == "0.6826895"

    def test_with_standard_error(self):
        assert estimate(1.0, 0.00123) == "1.0000000 ± 1.23e-03"
