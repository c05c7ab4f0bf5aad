"""Tests for the SVG chart writer."""

from __future__ import annotations

import math
from xml.etree import ElementTree

from bubbleprice._svg import Series, line_chart, write_svg

_NS = "{http://www.w3.org/2000/svg}"


def _parse(svg: str) -> ElementTree.Element:
    return ElementTree.fromstring(svg)


class TestLineChart:
    def test_well_formed(self):
        root = _parse(line_chart([Series("a", [1, 2, 3], [3, 2, 1])], title="t <&>"))
        assert root.tag == f"{_NS}svg"
        assert len(root.findall(f"{_NS}polyline")) == 1
        assert len(root.findall(f"{_NS}circle")) == 3

    def test_log_axes_skip_nonpositive_points(self):
        root = _parse(line_chart([Series("a", [1, 10, 100], [1.0, 0.0, 0.01])], log_x=True, log_y=True))
        assert len(root.findall(f"{_NS}circle")) == 2

    def test_nonfinite_points_skipped(self):
        root = _parse(line_chart([Series("a", [1, 2, 3], [1.0, math.nan, math.inf])]))
        assert len(root.findall(f"{_NS}circle")) == 1

    def test_dashed_series(self):
        svg = line_chart([Series("a", [1, 2], [1, 2]), Series("ref", [1, 2], [1, 1], dashed=True)])
        assert svg.count("stroke-dasharray") == 2  # polyline and legend swatch

    def test_empty_series(self):
        root = _parse(line_chart([Series("none", [], [])]))
        assert root.findall(f"{_NS}polyline") == []

    def test_write(self, tmp_path):
        path = write_svg(tmp_path / "sub" / "chart.svg", [Series("a", [1, 2], [2, 4])], x_label="beta")
        assert path.read_text().startswith("<svg")
        assert ">beta<" in path.read_text()
