# Copyright 2026 Harald Schilly <info@arjoma.at>, ARJOMA FlexCo.
# SPDX-License-Identifier: Apache-2.0

"""Tests for points, rectangles, grids and balls."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from invmap.geometry import Ball, BallShape, Grid, Point2, Rect, radius_schedule, rect_lattice

coords = st.floats(min_value=-10, max_value=10, allow_nan=False)
radii = st.floats(min_value=0.01, max_value=5)


class TestPoint2:
    def test_parse(self) -> None:
        assert Point2.parse("-0.25,0.75") == Point2(-0.25, 0.75)

    def test_parse_rejects_three_values(self) -> None:
        with pytest.raises(ValueError, match="x,y"):
            Point2.parse("1,2,3")

    def test_non_finite(self) -> None:
        with pytest.raises(ValueError, match="finite"):
            Point2(math.inf, 0.0)


class TestRect:
    def test_empty_rect_rejected(self) -> None:
        with pytest.raises(ValueError, match="min < max"):
            Rect.of(0, 0, 0, 1)

    def test_measures(self) -> None:
        r = Rect.of(-1, 0, 3, 3)
        assert r.width == 4
        assert r.height == 3
        assert r.area == 12
        assert r.diam == 5
        assert r.center == Point2(1, 1.5)

    def test_contains_with_tolerance(self) -> None:
        r = Rect.of(0, 0, 1, 1)
        pts = np.array([[0.5, 0.5], [1.0 + 1e-12, 0.5], [1.1, 0.5]])
        assert list(r.contains(pts)) == [True, False, False]
        assert list(r.contains(pts, tol=1e-9)) == [True, True, False]

    def test_union_intersect_grow(self) -> None:
        a = Rect.of(0, 0, 2, 2)
        b = Rect.of(1, 1, 3, 4)
        assert a.union(b) == Rect.of(0, 0, 3, 4)
        assert a.intersect(b) == Rect.of(1, 1, 2, 2)
        assert a.grow(1) == Rect.of(-1, -1, 3, 3)

    def test_disjoint_intersection_raises(self) -> None:
        with pytest.raises(ValueError):
            Rect.of(0, 0, 1, 1).intersect(Rect.of(2, 2, 3, 3))

    def test_bounding(self) -> None:
        pts = np.array([[0.0, 1.0], [2.0, -1.0], [1.0, 0.0]])
        assert Rect.bounding(pts, pad=0.5) == Rect.of(-0.5, -1.5, 2.5, 1.5)


class TestGrid:
    def test_centers_row_major(self) -> None:
        g = Grid(Rect.of(0, 0, 2, 2), 2, 2)
        expected = [[0.5, 0.5], [1.5, 0.5], [0.5, 1.5], [1.5, 1.5]]
        assert g.centers().tolist() == expected
        assert g.shape == (2, 2)

    def test_cell_of_edges(self) -> None:
        g = Grid(Rect.of(0, 0, 4, 2), 4, 2)
        i, j, inside = g.cell_of(np.array([[0.0, 0.0], [4.0, 2.0], [3.5, 0.5], [5.0, 1.0]]))
        assert i.tolist()[:3] == [0, 3, 3]
        assert j.tolist()[:3] == [0, 1, 0]
        assert inside.tolist() == [True, True, True, False]

    def test_square_cells(self) -> None:
        g = Grid.square_cells(Rect.of(0, 0, 1, 0.5), 0.1)
        assert (g.nx, g.ny) == (10, 5)

    def test_refined(self) -> None:
        g = Grid(Rect.of(0, 0, 1, 1), 3, 2).refined(4)
        assert (g.nx, g.ny) == (12, 8)

    def test_needs_cells(self) -> None:
        with pytest.raises(ValueError):
            Grid(Rect.of(0, 0, 1, 1), 0, 1)


class TestBall:
    def test_closed_and_open(self) -> None:
        b = Ball(Point2(0, 0), 1.0)
        pts = np.array([[1.0, 0.0], [0.5, 0.5], [0.8, 0.8]])
        assert b.contains(pts).tolist() == [True, True, False]
        assert b.contains(pts, closed=False).tolist() == [False, True, False]

    def test_square_norm(self) -> None:
        q = Ball(Point2(0, 0), 1.0, BallShape.SQUARE)
        assert q.contains(np.array([[0.9, -0.9]])).all()
        assert q.area == 4.0
        assert q.perimeter == 8.0

    def test_square_boundary_starts_bottom_left(self) -> None:
        q = Ball(Point2(1, 1), 0.5, BallShape.SQUARE)
        pts = q.boundary_point(np.array([0.0, 0.25, 0.5, 0.75]))
        assert pts.tolist() == [[0.5, 0.5], [1.5, 0.5], [1.5, 1.5], [0.5, 1.5]]

    def test_touching_disks(self) -> None:
        a = Ball(Point2(-1, 0), 1.0)
        b = Ball(Point2(1, 0), 1.0)
        assert a.interiors_disjoint(b)
        assert not a.disjoint_from(b)

    def test_overlapping_squares(self) -> None:
        a = Ball(Point2(0, 0), 1.0, BallShape.SQUARE)
        b = Ball(Point2(1.5, 1.5), 1.0, BallShape.SQUARE)
        assert not a.interiors_disjoint(b)

    def test_contains_ball(self) -> None:
        outer = Ball(Point2(0, 0), 1.0, BallShape.SQUARE)
        assert outer.contains_ball(Ball(Point2(-0.25, 0.75), 0.25, BallShape.SQUARE))
        assert not outer.contains_ball(Ball(Point2(0.25, 0.75), 0.3, BallShape.SQUARE))

    def test_lattice_size(self) -> None:
        pts = Ball(Point2(0, 0), 1.0).lattice(4096)
        assert 0.9 * 4096 < len(pts) < 1.1 * 4096

    def test_radius_must_be_positive(self) -> None:
        with pytest.raises(ValueError, match="positive"):
            Ball(Point2(0, 0), 0.0)

    def test_str(self) -> None:
        assert str(Ball(Point2(-0.25, 0.75), 0.25, BallShape.SQUARE)) == "Q(-0.25,0.75;0.25)"


def test_radius_schedule() -> None:
    assert radius_schedule(1.0, count=3) == [1.0, 0.75, 0.5625]


@given(coords, coords, radii, st.floats(min_value=0, max_value=1, exclude_max=True))
def test_disk_boundary_on_circle(x: float, y: float, r: float, t: float) -> None:
    b = Ball(Point2(x, y), r)
    p = b.boundary_point(np.array([t]))[0]
    assert math.hypot(p[0] - x, p[1] - y) == pytest.approx(r, rel=1e-9)


@given(coords, coords, radii, radii, st.integers(min_value=1, max_value=500))
def test_rect_lattice_inside(x: float, y: float, w: float, h: float, n: int) -> None:
    rect = Rect.of(x, y, x + w, y + h)
    pts = rect_lattice(rect, n)
    assert len(pts) >= 1
    assert rect.contains(pts, tol=1e-9 * rect.diam).all()
