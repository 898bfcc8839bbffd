# Copyright 2026 Harald Schilly <info@arjoma.at>, ARJOMA FlexCo.
# SPDX-License-Identifier: Apache-2.0

"""End-to-end tests for the invmap command line."""

import csv
from pathlib import Path

import pytest

from invmap.cli import main
from invmap.formats import read_gridmap


def _rows(path: Path) -> list[list[str]]:
    with path.open(encoding="utf-8", newline="") as f:
        return list(csv.reader(f))


def test_version(capsys: pytest.CaptureFixture[str]) -> None:
    with pytest.raises(SystemExit, match="0"):
        main(["--version"])
    assert capsys.readouterr().out.startswith("invmap ")


def test_subcommand_required() -> None:
    with pytest.raises(SystemExit, match="2"):
        main([])


class TestGallery:
    def test_list(self, capsys: pytest.CaptureFixture[str]) -> None:
        main(["gallery"])
        lines = capsys.readouterr().out.splitlines()
        names = [ln.split()[0] for ln in lines]
        assert names == [
            "identity", "linear", "radial_cavitation", "cube_cavitation",
            "bad_inv_nofd", "bv_inverse", "fold",
        ]
        fold = lines[names.index("fold")]
        assert "inv=False" in fold

    def test_export_and_reload(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """An exported gridmap can be fed back in with --map."""
        target = tmp_path / "id.gridmap2"
        main(["gallery", "--res", "8", "--export", "identity", str(target)])
        assert capsys.readouterr().out.startswith("OK: wrote 64 nodes")
        gmap = read_gridmap(target)
        assert gmap.grid.shape == (8, 8)

        out = tmp_path / "out"
        main(["analyze", "--map", str(target), "--res", "16", "-o", str(out)])
        assert capsys.readouterr().out.startswith("OK: id.gridmap2")


class TestAnalyze:
    def test_writes_outputs(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        main(["analyze", "--map", "linear(a=2,b=1)", "--res", "32", "-o", str(tmp_path)])
        assert capsys.readouterr().out.startswith("OK:")
        for name in ("analysis.csv", "jdet.svg", "kdist.svg"):
            assert (tmp_path / name).exists(), f"{name} not written"

    def test_verbose_logs_summary(
        self, tmp_path: Path, caplog: pytest.LogCaptureFixture
    ) -> None:
        with caplog.at_level("DEBUG", logger="invmap"):
            main(["analyze", "--res", "16", "-o", str(tmp_path), "-v"])
        assert "kdist_mean =" in caplog.text

    def test_output_independent_of_threads(self, tmp_path: Path) -> None:
        """Artifacts are byte-identical for any worker count."""
        for threads in ("1", "4"):
            main(["analyze", "--map", "radial_cavitation", "--res", "48",
                  "--threads", threads, "-o", str(tmp_path / threads)])
        one = (tmp_path / "1" / "analysis.csv").read_bytes()
        four = (tmp_path / "4" / "analysis.csv").read_bytes()
        assert one == four

    def test_env_output_dir(
        self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        monkeypatch.setenv("INVMAP_OUT", str(tmp_path / "env"))
        main(["analyze", "--res", "8"])
        assert (tmp_path / "env" / "analysis.csv").exists()


class TestErrors:
    def test_malformed_map_spec(self) -> None:
        with pytest.raises(SystemExit, match="2"):
            main(["analyze", "--map", "linear(a=x)", "--res", "8"])

    def test_unknown_map(self, tmp_path: Path) -> None:
        with pytest.raises(SystemExit, match="3"):
            main(["analyze", "--map", "nope", "--res", "8", "-o", str(tmp_path)])

    def test_missing_map_file(self, tmp_path: Path) -> None:
        with pytest.raises(SystemExit, match="2"):
            main(["analyze", "--map", str(tmp_path / "gone.pwa2"), "-o", str(tmp_path)])

    def test_bad_config(self, tmp_path: Path, caplog: pytest.LogCaptureFixture) -> None:
        cfg = tmp_path / "run.cfg"
        cfg.write_text("res=lots\n", encoding="utf-8")
        with pytest.raises(SystemExit, match="2"):
            main(["analyze", "--config", str(cfg)])
        assert "CONFIG:" in caplog.text

    def test_invalid_threshold(self, tmp_path: Path) -> None:
        with pytest.raises(SystemExit, match="2"):
            main(["analyze", "--rho0", "-1", "-o", str(tmp_path)])

    def test_point_on_the_loop(self, tmp_path: Path) -> None:
        with pytest.raises(SystemExit, match="4"):
            main(["degree", "--res", "32", "--point", "1,0", "-o", str(tmp_path)])


class TestDegree:
    def test_point_on_bad_map(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        main([
            "degree", "--map", "bad_inv_nofd", "--square", "--center=-0.25,0.75",
            "--radius", "0.25", "--point=-0.25,0.75", "-o", str(tmp_path),
        ])
        assert capsys.readouterr().out.strip() == "-1"

    def test_raster(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        main(["degree", "--res", "32", "--radius", "0.5", "-o", str(tmp_path)])
        assert capsys.readouterr().out.startswith("OK: im_T area")
        for name in ("degree.csv", "degree.pgm", "degree.svg", "topimage.csv"):
            assert (tmp_path / name).exists(), f"{name} not written"
        assert len(_rows(tmp_path / "topimage.csv")) == 2


class TestCheckInv:
    def test_identity_passes(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        main(["check-inv", "--res", "64", "-o", str(tmp_path)])
        assert capsys.readouterr().out.startswith("OK: 8 check(s) passed")
        assert len(_rows(tmp_path / "check_inv.csv")) == 9

    def test_fold_fails(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        with pytest.raises(SystemExit, match="1"):
            main(["check-inv", "--map", "fold", "--res", "64", "-o", str(tmp_path)])
        assert capsys.readouterr().out.startswith("FAIL:")
        kinds = {row[1] for row in _rows(tmp_path / "witnesses.csv")[1:]}
        assert kinds == {"outside-in-imT"}
        assert (tmp_path / "witnesses.svg").exists()


class TestInvert:
    def test_radial_cavity(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        main(["invert", "--map", "radial_cavitation", "--res", "64", "-o", str(tmp_path)])
        assert capsys.readouterr().out.startswith("OK: inverse of radial_cavitation: 1 cavity")
        h = read_gridmap(tmp_path / "inverse.gridmap2")
        assert h.grid.shape == (64, 64)
        assert len(_rows(tmp_path / "cavities.csv")) == 2
        assert (tmp_path / "inverse.prov").exists()


class TestEnergy:
    def test_identity(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        main(["energy", "--res", "32", "-o", str(tmp_path)])
        assert capsys.readouterr().out.startswith("OK: lhs 16")
        assert len(_rows(tmp_path / "energy.csv")) == 2

    def test_sweep_and_key_estimate(self, tmp_path: Path) -> None:
        main([
            "energy", "--res", "64", "--sweep", "--key-estimate", "0,0",
            "--radii", "0.2,0.4", "-o", str(tmp_path),
        ])
        assert len(_rows(tmp_path / "energy.csv")) == 4
        assert (tmp_path / "energy.svg").exists()
        assert len(_rows(tmp_path / "key_estimate.csv")) == 3

    def test_bad_radii(self) -> None:
        with pytest.raises(SystemExit, match="2"):
            main(["energy", "--radii", "0.1,-1"])

    def test_bv_inverse_fails(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """h of bv_inverse is BV but not Sobolev: the energy check must not pass."""
        with pytest.raises(SystemExit, match="1"):
            main(["energy", "--map", "bv_inverse", "--res", "128", "-o", str(tmp_path)])
        assert capsys.readouterr().out.startswith("FAIL:")
