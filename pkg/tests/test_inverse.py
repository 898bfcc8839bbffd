# Copyright 2026 Harald Schilly <info@arjoma.at>, ARJOMA FlexCo.
# SPDX-License-Identifier: Apache-2.0

"""Tests for cavity detection, the generalized inverse and its diagnostics."""

import dataclasses
import logging
import math

import numpy as np
import pytest

from invmap.analysis import MapAnalysis, analyze
from invmap.gallery import GalleryEntry, gallery_get
from invmap.geometry import Ball, Grid, Point2, Rect
from invmap.invcheck import check_inverse_inv
from invmap.inverse import (
    InverseMap,
    Provenance,
    build_inverse,
    change_of_variables_check,
    default_target_grid,
    detect_cavities,
    detect_jump,
    inverse_derivative_check,
    inverse_jacobian,
    jump_adjacent,
    multiplicity_raster,
    resample_inverse,
    roundtrip_residual,
)


def _setup(entry: GalleryEntry, n: int) -> tuple[MapAnalysis, Grid]:
    a = analyze(entry.map, Grid(entry.map.domain, n, n))
    return a, default_target_grid(entry.map, a, n, n)


class TestIdentity:
    def test_inverse_is_identity(self, identity: GalleryEntry) -> None:
        a, target = _setup(identity, 64)
        assert target.domain == Rect.of(-2, -2, 2, 2)
        inv = build_inverse(identity.map, a, target)
        assert inv.cavities == ()
        assert inv.counts()["graph"] == target.size
        assert inv.undefined_fraction == 0.0
        np.testing.assert_allclose(inv.values.reshape(-1, 2), target.centers(), atol=1e-12)
        assert roundtrip_residual(identity.map, inv) < 1e-9

    def test_change_of_variables(self, identity: GalleryEntry) -> None:
        a, target = _setup(identity, 64)
        lhs, rhs = change_of_variables_check(identity.map, a, target)
        assert lhs == pytest.approx(16.0)
        assert rhs == pytest.approx(16.0)

    def test_rho0_positive(self, identity: GalleryEntry) -> None:
        a, target = _setup(identity, 16)
        with pytest.raises(ValueError, match="rho0"):
            build_inverse(identity.map, a, target, rho0=0.0)

    def test_inverse_satisfies_inv(
        self, identity: GalleryEntry, caplog: pytest.LogCaptureFixture
    ) -> None:
        a, target = _setup(identity, 32)
        inv = build_inverse(identity.map, a, target)
        balls = [Ball(Point2(0, 0), 0.5), Ball(Point2(1.9, 0), 0.5)]
        with caplog.at_level(logging.WARNING, logger="invmap"):
            reports = check_inverse_inv(inv, balls, Grid(target.domain, 64, 64), n_samples=512)
        assert "1 ball(s) outside the inverse window skipped" in caplog.text
        assert len(reports) == 1
        assert reports[0].ok()


class TestLinear:
    def test_inverse_values(self, linear: GalleryEntry) -> None:
        a, target = _setup(linear, 64)
        assert target.domain == Rect.of(-4, -2, 4, 2)
        inv = build_inverse(linear.map, a, target)
        expected = target.centers() * [0.5, 1.0]
        np.testing.assert_allclose(inv.values.reshape(-1, 2), expected, atol=1e-9)

    def test_derivative_check(self, linear: GalleryEntry) -> None:
        a, target = _setup(linear, 64)
        inv = build_inverse(linear.map, a, target)
        err, n = inverse_derivative_check(linear.map, a, inv)
        assert n > 1000
        assert err < 1e-6


class TestRadialCavitation:
    @pytest.fixture
    def setup(self, radial: GalleryEntry) -> tuple[MapAnalysis, Grid]:
        return _setup(radial, 64)

    def test_one_cavity_at_the_origin(
        self,
        radial: GalleryEntry,
        setup: tuple[MapAnalysis, Grid],
        caplog: pytest.LogCaptureFixture,
    ) -> None:
        a, target = setup
        assert target.domain.max.x == pytest.approx(2.0)
        with caplog.at_level(logging.INFO, logger="invmap"):
            cavities = detect_cavities(radial.map, a, target)
        assert len(cavities) == 1
        cav = cavities[0]
        assert math.hypot(cav.source.x, cav.source.y) <= a.grid.cell_diag
        assert cav.area == pytest.approx(math.pi, abs=0.4)
        assert "Cavity at" in caplog.text

    def test_cavity_cells_map_to_the_origin(
        self, radial: GalleryEntry, setup: tuple[MapAnalysis, Grid]
    ) -> None:
        a, target = setup
        inv = build_inverse(radial.map, a, target)
        (cav,) = inv.cavities
        i, j, _ = target.cell_of(np.array([[0.3, 0.2], [1.5, 0.03]]))
        assert inv.provenance[j[0], i[0]] == Provenance.CAVITY
        assert inv.values[j[0], i[0]].tolist() == [cav.source.x, cav.source.y]
        # outside the unit disk h(y) = (|y| - 1) y / |y|
        y = target.centers().reshape(target.ny, target.nx, 2)[j[1], i[1]]
        expected = y * (1.0 - 1.0 / np.hypot(*y))
        assert inv.provenance[j[1], i[1]] in (Provenance.GRAPH, Provenance.AVERAGED)
        np.testing.assert_allclose(inv.values[j[1], i[1]], expected, atol=0.02)

    def test_no_cavity_for_identity(self, identity: GalleryEntry) -> None:
        a, target = _setup(identity, 32)
        assert detect_cavities(identity.map, a, target) == []

    def test_dh_vanishes_on_the_cavity(
        self, radial: GalleryEntry, setup: tuple[MapAnalysis, Grid]
    ) -> None:
        a, target = setup
        inv = build_inverse(radial.map, a, target)
        jac, valid = inverse_jacobian(inv)
        cav = inv.provenance == Provenance.CAVITY
        assert cav.sum() > 100
        assert (jac[cav] == 0.0).all()
        assert valid[cav].all()
        # the rim jump from the origin to |h| ~ 0 does not leak into graph cells
        rim = ~cav & inv.defined & valid
        y = target.centers().reshape(target.ny, target.nx, 2)
        outer = rim & (np.hypot(y[..., 0], y[..., 1]) > 1.1)
        assert np.abs(jac[outer]).max() < 5.0

    def test_area_shrinks_with_the_radius(
        self, radial: GalleryEntry, setup: tuple[MapAnalysis, Grid]
    ) -> None:
        a, target = setup
        (cav,) = detect_cavities(radial.map, a, target)
        assert len(cav.areas) > 1
        assert cav.areas[-1] == cav.area
        assert cav.shrinks()
        assert not dataclasses.replace(cav, areas=(1.0, 3.0)).shrinks()

    def test_shrinking_area_is_not_flagged(
        self,
        radial: GalleryEntry,
        setup: tuple[MapAnalysis, Grid],
        caplog: pytest.LogCaptureFixture,
    ) -> None:
        a, target = setup
        # radii given smallest first still run largest first
        with caplog.at_level(logging.WARNING, logger="invmap"):
            cavities = detect_cavities(radial.map, a, target, radii=[0.05, 0.1, 0.2])
        assert len(cavities) == 1
        assert "grows as the radius shrinks" not in caplog.text


class TestRadialAt256:
    @pytest.fixture(scope="class")
    def inv(self) -> InverseMap:
        entry = gallery_get("radial_cavitation")
        a, target = _setup(entry, 256)
        return build_inverse(entry.map, a, target)

    def test_exactly_one_cavity_of_area_pi(self, inv: InverseMap) -> None:
        assert len(inv.cavities) == 1
        assert abs(inv.cavities[0].area - math.pi) <= 0.05 * math.pi

    def test_graph_cells_match_the_analytic_inverse(self, inv: InverseMap) -> None:
        y = inv.grid.centers().reshape(inv.grid.ny, inv.grid.nx, 2)
        r = np.hypot(y[..., 0], y[..., 1])
        mask = (inv.provenance == Provenance.GRAPH) & (r > 1.05)
        assert mask.sum() > 1000
        expected = y[mask] * (1.0 - 1.0 / r[mask])[:, None]
        err = np.hypot(*(inv.values[mask] - expected).T)
        assert err.max() <= 2 * inv.grid.cell_diag

    def test_dh_is_zero_on_cavity_cells(self, inv: InverseMap) -> None:
        jac, _ = inverse_jacobian(inv)
        assert (jac[inv.provenance == Provenance.CAVITY] == 0.0).all()


class TestBvInverse:
    def test_jump_along_the_collapsed_strip(self) -> None:
        entry = gallery_get("bv_inverse")
        a = analyze(entry.map, Grid(entry.map.domain, 100, 60))
        target = default_target_grid(entry.map, a, 80, 60)
        assert target.domain.min.x == pytest.approx(-1.0)
        assert target.domain.max.x == pytest.approx(3.0)
        inv = build_inverse(entry.map, a, target)
        jumps = detect_jump(inv)
        assert jumps
        xs = target.xs()
        assert all(0.8 < xs[jp.cell_a[1]] < 1.2 for jp in jumps)
        assert max(jp.magnitude for jp in jumps) > 0.8
        assert jump_adjacent(inv).sum() >= len({jp.cell_a for jp in jumps})


class TestGridHelpers:
    def test_from_values_and_resample(self) -> None:
        grid = Grid(Rect.of(0, 0, 3, 1), 3, 1)
        values = np.array([[[0.0, 0.0], [1.0, 0.0], [np.nan, np.nan]]])
        inv = InverseMap.from_values(grid, values)
        assert inv.counts() == {"cavity": 0, "graph": 2, "averaged": 0, "undefined": 1}
        assert inv.undefined_fraction == pytest.approx(1 / 3)
        h = resample_inverse(inv)
        assert h.evaluate_many(np.array([[2.5, 0.5]])).tolist() == [[1.0, 0.0]]

    def test_resample_needs_a_defined_cell(self) -> None:
        grid = Grid(Rect.of(0, 0, 1, 1), 1, 1)
        inv = InverseMap.from_values(grid, np.full((1, 1, 2), np.nan))
        with pytest.raises(ValueError, match="undefined everywhere"):
            resample_inverse(inv)

    def test_fold_multiplicity(self) -> None:
        fold = gallery_get("fold").map
        grid = Grid(fold.domain, 32, 32)
        m = multiplicity_raster(fold, grid, grid)
        assert (m.counts[16:] == 2).all()
        assert (m.counts[:16] == 0).all()

    def test_multiplicity_grid_mismatch(self, identity: GalleryEntry) -> None:
        grid = Grid(identity.map.domain, 8, 8)
        a = analyze(identity.map, grid)
        with pytest.raises(ValueError, match="different source grid"):
            multiplicity_raster(identity.map, grid.refined(2), grid, analysis=a)
