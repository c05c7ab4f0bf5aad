"""Shared fixtures for bubbleprice tests."""

from __future__ import annotations

import logging

import pytest

from bubbleprice import LocalVolModel
from bubbleprice._term import force_color


@pytest.fixture
def tmp_out(tmp_path):
    """Temporary output directory for run artifacts."""
    return str(tmp_path / ".bubbleprice")


@pytest.fixture
def cev():
    return LocalVolModel.cev(1.0)


@pytest.fixture
def gbm():
    """Geometric (p = 1) model: a true martingale."""
    return LocalVolModel.power(0.2, 1.0, 1.0)


@pytest.fixture(autouse=True)
def _plain_terminal(monkeypatch):
    """No colours, no inherited output directory and no handlers left by main()."""
    monkeypatch.delenv("BUBBLEPRICE_OUT", raising=False)
    force_color(False)
    yield
    force_color(None)
    log = logging.getLogger("bubbleprice")
    log.handlers.clear()
    log.setLevel(logging.NOTSET)
    log.propagate = True
