# Copyright 2026 Harald Schilly <info@arjoma.at>, ARJOMA FlexCo.
# SPDX-License-Identifier: Apache-2.0

"""Tests for the gallery maps and the catalog lookup."""

import math
from pathlib import Path

import numpy as np
import pytest

from invmap.analysis import analyze
from invmap.degree import trace_boundary
from invmap.energy import distortion_integral
from invmap.errors import MapSpecError, UnknownEntry
from invmap.gallery import (
    Q1,
    Q2,
    Q3,
    Q_BIG,
    GalleryEntry,
    cube_cavitation_map,
    gallery_get,
    gallery_list,
    load_map,
    parse_spec,
)
from invmap.geometry import FloatArray, Grid, Point2
from invmap.maps import evaluate


def _square_edges(lo: float, hi: float, n: int) -> FloatArray:
    t = np.linspace(lo, hi, n)
    lo_col, hi_col = np.full(n, lo), np.full(n, hi)
    return np.vstack([
        np.column_stack([t, lo_col]),
        np.column_stack([hi_col, t]),
        np.column_stack([t, hi_col]),
        np.column_stack([lo_col, t]),
    ])


class TestCatalog:
    def test_list_order(self) -> None:
        assert [name for name, _ in gallery_list()] == [
            "identity", "linear", "radial_cavitation", "cube_cavitation",
            "bad_inv_nofd", "bv_inverse", "fold",
        ]

    @pytest.mark.parametrize(
        ("spec", "expected"),
        [
            ("identity", ("identity", {})),
            ("linear(a=3, b=-1)", ("linear", {"a": 3.0, "b": -1.0})),
            ("cube_cavitation(r=0.5)", ("cube_cavitation", {"r": 0.5})),
            ("linear()", ("linear", {})),
        ],
    )
    def test_parse_spec(self, spec: str, expected: tuple[str, dict[str, float]]) -> None:
        assert parse_spec(spec) == expected

    @pytest.mark.parametrize("spec", ["linear(a=x)", "linear(a)", "(a=1)", "linear(a=1"])
    def test_malformed_spec(self, spec: str) -> None:
        with pytest.raises(MapSpecError):
            parse_spec(spec)

    def test_unknown_entry(self) -> None:
        with pytest.raises(UnknownEntry, match="known: identity"):
            gallery_get("spiral")

    def test_unknown_argument(self) -> None:
        with pytest.raises(MapSpecError, match="takes no argument"):
            gallery_get("fold(a=1)")

    def test_defaults_and_overrides(self) -> None:
        assert evaluate(gallery_get("linear").map, Point2(1, 1)) == Point2(2, 1)
        assert evaluate(gallery_get("linear(b=3)").map, Point2(1, 1)) == Point2(2, 3)

    @pytest.mark.parametrize("spec", ["linear(a=0)", "cube_cavitation(r=0)"])
    def test_degenerate_parameters(self, spec: str) -> None:
        with pytest.raises(MapSpecError):
            gallery_get(spec)

    def test_declared_properties(self) -> None:
        assert gallery_get("identity").props.finite_distortion
        assert not gallery_get("linear(a=-1)").props.satisfies_inv
        assert not gallery_get("fold").props.satisfies_inv
        bad = gallery_get("bad_inv_nofd")
        assert bad.props.satisfies_inv and not bad.props.finite_distortion
        assert bad.schedule_balls() == [Q_BIG, Q1, Q2, Q3]
        assert bad.schedule_nested_pairs() == [(Q1, Q_BIG)]

    def test_load_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(MapSpecError, match="not found"):
            load_map(str(tmp_path / "gone.gridmap2"))


class TestRadialCavitation:
    @pytest.mark.parametrize(
        ("x", "fx"),
        [((0.5, 0.0), (1.5, 0.0)), ((0.0, -0.25), (0.0, -1.25)), ((0.6, 0.8), (1.2, 1.6))],
    )
    def test_values(self, radial: GalleryEntry, x: tuple[float, float],
                    fx: tuple[float, float]) -> None:
        out = evaluate(radial.map, Point2(*x))
        assert out.x == pytest.approx(fx[0])
        assert out.y == pytest.approx(fx[1])

    def test_distortion_integral_is_three_pi(self, radial: GalleryEntry) -> None:
        grid = Grid(radial.map.domain, 128, 128)
        omega = radial.map.omega
        assert omega is not None
        within = omega.contains(grid.centers()).reshape(grid.shape)
        total = distortion_integral(analyze(radial.map, grid), within)
        assert total == pytest.approx(3 * math.pi, rel=0.02)


class TestCubeCavitation:
    def test_square_collapses_onto_its_boundary(self) -> None:
        fmap = cube_cavitation_map(Point2(0.5, -0.5), 0.25)
        inside = np.random.default_rng(0).uniform(0.3, 0.7, size=(200, 2)) - [0.0, 1.0]
        out = fmap.evaluate_many(inside)
        m = np.max(np.abs(out - [0.5, -0.5]), axis=1)
        np.testing.assert_allclose(m, 0.25, atol=1e-12)

    def test_identity_outside(self) -> None:
        fmap = cube_cavitation_map(Point2(0.0, 0.0), 0.5)
        pts = np.array([[0.75, 0.0], [-0.9, 0.6], [0.5, 0.5]])
        np.testing.assert_allclose(fmap.evaluate_many(pts), pts)

    def test_center_goes_to_the_right_side(self) -> None:
        fmap = cube_cavitation_map(Point2(1.0, 2.0), 0.5)
        assert evaluate(fmap, Point2(1.0, 2.0)) == Point2(1.5, 2.0)


class TestBadInvNofd:
    def test_identity_on_the_domain_boundary(self, bad: GalleryEntry) -> None:
        edges = _square_edges(-2.0, 2.0, 41)
        np.testing.assert_allclose(bad.map.evaluate_many(edges), edges, atol=1e-9)

    def test_q1_lands_on_its_boundary_image(self, bad: GalleryEntry) -> None:
        """Every point of Q1 maps onto f(dQ1), so J_f vanishes there."""
        loop = trace_boundary(bad.map, Q1, 0.002)
        images = bad.map.evaluate_many(Q1.lattice(400))
        assert loop.distance(images, 0.001).max() < 5e-3

    def test_singular_points(self, bad: GalleryEntry) -> None:
        points = {tuple(p) for p in bad.map.singular_points.tolist()}
        assert points >= {(Q2.center.x, Q2.center.y), (Q3.center.x, Q3.center.y)}


class TestBvInverse:
    @pytest.mark.parametrize(
        ("x", "fx"),
        [((0.5, 0.5), (0.5, 0.5)), ((1.5, 0.5), (1.0, 0.5)), ((2.5, 0.5), (1.5, 0.5))],
    )
    def test_values(self, x: tuple[float, float], fx: tuple[float, float]) -> None:
        out = evaluate(gallery_get("bv_inverse").map, Point2(*x))
        assert out.x == pytest.approx(fx[0])
        assert out.y == pytest.approx(fx[1])

    def test_lipschitz_on_the_strip(self) -> None:
        fmap = gallery_get("bv_inverse").map
        rng = np.random.default_rng(0)
        p = rng.uniform([0.0, 0.0], [3.0, 1.0], size=(500, 2))
        q = rng.uniform([0.0, 0.0], [3.0, 1.0], size=(500, 2))
        df = np.hypot(*(fmap.evaluate_many(p) - fmap.evaluate_many(q)).T)
        dx = np.hypot(*(p - q).T)
        assert (df <= dx + 1e-12).all()

    def test_identity_in_y(self) -> None:
        fmap = gallery_get("bv_inverse").map
        pts = np.random.default_rng(1).uniform([-1.0, -1.0], [4.0, 2.0], size=(100, 2))
        np.testing.assert_array_equal(fmap.evaluate_many(pts)[:, 1], pts[:, 1])
