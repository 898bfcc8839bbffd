# Copyright 2026 Harald Schilly <info@arjoma.at>, ARJOMA FlexCo.
# SPDX-License-Identifier: Apache-2.0

"""Tests for the CSV, PGM and SVG writers."""

import csv
import math
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from invmap.degree import TopImage, topological_image
from invmap.energy import EnergyReport, KeyEstimateProbe
from invmap.gallery import GalleryEntry
from invmap.geometry import Ball, BallShape, Grid, Point2, Rect
from invmap.inverse import Jump
from invmap.invcheck import InvReport, StructReport, Verdict, Witness
from invmap.report import (
    fmt,
    write_degree_csv,
    write_energy_csv,
    write_heatmap_svg,
    write_inv_csv,
    write_jumps_csv,
    write_key_estimate_csv,
    write_overlay_svg,
    write_pgm,
    write_rows,
    write_sweep_svg,
    write_witnesses_csv,
)
from invmap.verify import verify_outputs


def _read(path: Path) -> list[list[str]]:
    with path.open(encoding="utf-8", newline="") as f:
        return list(csv.reader(f))


@pytest.fixture
def top(identity: GalleryEntry) -> TopImage:
    grid = Grid(identity.map.domain, 32, 32)
    return topological_image(identity.map, Ball(Point2(0, 0), 1.0), grid)


def test_fmt() -> None:
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(math.inf) == "inf"
    assert fmt(-math.inf) == "-inf"
    assert fmt(math.nan) == "nan"
    assert fmt(2.0) == "2"


def test_write_rows(tmp_path: Path) -> None:
    out = tmp_path / "sub" / "t.csv"
    assert write_rows(out, ["a", "b"], [[1, 0.5], ["x,y", math.inf]]) == 2
    assert out.read_text(encoding="utf-8") == 'a,b\n1,0.5\n"x,y",inf\n'


class TestRaster:
    def test_degree_csv(self, tmp_path: Path, top: TopImage) -> None:
        n = write_degree_csv(top.raster, tmp_path / "degree.csv")
        rows = _read(tmp_path / "degree.csv")
        assert rows[0] == ["px", "py", "deg", "dist"]
        assert n == top.raster.grid.size == len(rows) - 1
        assert {r[2] for r in rows[1:]} == {"0", "1", "near"}

    def test_pgm(self, tmp_path: Path, top: TopImage) -> None:
        n = write_pgm(top.raster, tmp_path / "degree.pgm")
        assert n == top.raster.grid.size
        lines = (tmp_path / "degree.pgm").read_text(encoding="ascii").splitlines()
        assert lines[0] == "P2"
        assert lines[2] == f"{top.raster.grid.nx} {top.raster.grid.ny}"
        # the window is padded, so the corners are outside the disk
        assert lines[4].split()[0] == "128"
        assert verify_outputs(tmp_path) == []

    def test_overlay_svg(self, tmp_path: Path, top: TopImage) -> None:
        wit = [Witness(Point2(0.1, 0.1), None, "test")]
        n = write_overlay_svg(top, "B(0,0;1)", tmp_path / "o.svg", witnesses=wit)
        r = top.raster
        assert n == int(np.count_nonzero(r.imt)) + int(np.count_nonzero(r.near))
        root = ET.parse(tmp_path / "o.svg").getroot()
        assert root.tag.endswith("svg")
        assert len(root.findall("{http://www.w3.org/2000/svg}circle")) == 1


class TestTables:
    def test_inv_csv(self, tmp_path: Path) -> None:
        ok = InvReport(Ball(Point2(0, 0), 0.5), 100, 100, 0, 0)
        bad = InvReport(Ball(Point2(0.5, 0), 0.25, BallShape.SQUARE), 50, 50, 10, 0)
        struct = StructReport(nested_ok=Verdict.FAIL, label="nested")
        assert write_inv_csv([ok, bad], [struct], 0.005, tmp_path / "check_inv.csv") == 3
        rows = _read(tmp_path / "check_inv.csv")
        assert rows[1] == ["inv-disk", "B(0,0;0.5)", "0,0", "0.5", "pass", "0"]
        assert rows[2][0] == "inv-square"
        assert rows[2][4:] == ["fail", "0.1"]
        assert rows[3] == ["nested", "", "", "", "fail", ""]

    def test_witnesses_csv(self, tmp_path: Path) -> None:
        wit = [
            ("inv", Witness(Point2(0, 1), Point2(2, 3), "outside-in-imT")),
            ("nested", Witness(Point2(0.5, 0.5), None, "pixel")),
        ]
        assert write_witnesses_csv(wit, tmp_path / "w.csv") == 2
        rows = _read(tmp_path / "w.csv")
        assert rows[1] == ["inv", "outside-in-imT", "0", "1", "2", "3"]
        assert rows[2] == ["nested", "pixel", "0.5", "0.5", "", ""]

    def test_jumps_csv(self, tmp_path: Path) -> None:
        grid = Grid(Rect.of(0, 0, 4, 2), 4, 2)
        jumps = [Jump((0, 1), (0, 2), 1.5), Jump((0, 3), (1, 3), 0.75)]
        assert write_jumps_csv(jumps, grid, tmp_path / "jumps.csv") == 2
        rows = _read(tmp_path / "jumps.csv")
        assert rows[1] == ["2", "0.5", "x", "1.5"]
        assert rows[2] == ["3.5", "1", "y", "0.75"]

    def test_energy_and_key_estimate(self, tmp_path: Path) -> None:
        report = EnergyReport(16.0, 16.0, 0.0, (64, 64), 0)
        assert write_energy_csv([report], "identity", tmp_path / "energy.csv") == 1
        assert _read(tmp_path / "energy.csv")[1] == [
            "identity", "64", "64", "16", "16", "0", "0", "0", "0"
        ]
        probe = KeyEstimateProbe(Point2(0, 0), [0.1], 2.0, [0.2], [0.5], [0.5], [0.5], [0.4])
        assert write_key_estimate_csv(probe, tmp_path / "key.csv") == 1
        assert _read(tmp_path / "key.csv")[0][0] == "radius"


class TestSvg:
    def test_heatmap_pools_large_fields(self, tmp_path: Path) -> None:
        grid = Grid(Rect.of(0, 0, 1, 1), 256, 256)
        field = np.arange(256 * 256, dtype=np.float64).reshape(256, 256)
        assert write_heatmap_svg(field, grid, "big", tmp_path / "h.svg") == 128 * 128
        assert verify_outputs(tmp_path) == []

    def test_heatmap_marks_infinite_cells(self, tmp_path: Path) -> None:
        grid = Grid(Rect.of(0, 0, 2, 1), 2, 1)
        n = write_heatmap_svg(np.array([[1.0, math.inf]]), grid, "K_f", tmp_path / "k.svg")
        assert n == 2
        assert 'fill="#000000"' in (tmp_path / "k.svg").read_text(encoding="utf-8")

    def test_sweep(self, tmp_path: Path) -> None:
        reports = [
            EnergyReport(float(lhs), 16.0, abs(lhs - 16.0) / 16.0, (n, n), 0)
            for n, lhs in ((32, 15.0), (64, 15.5), (128, 15.9))
        ]
        assert write_sweep_svg(reports, "sweep", tmp_path / "s.svg") == 3
        root = ET.parse(tmp_path / "s.svg").getroot()
        lines = root.findall("{http://www.w3.org/2000/svg}polyline")
        assert [ln.get("id") for ln in lines] == ["lhs", "rhs"]
