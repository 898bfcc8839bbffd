# Copyright 2026 Harald Schilly <info@arjoma.at>, ARJOMA FlexCo.
# SPDX-License-Identifier: Apache-2.0

"""Tests for the planar map variants."""

import numpy as np
import pytest

from invmap.errors import OutOfDomain
from invmap.gallery import GalleryEntry
from invmap.geometry import Grid, Point2, Rect
from invmap.maps import AffinePiece, Analytic, GridSampled, PiecewiseAffine, compose, evaluate


def _half_x() -> Analytic:
    mat = np.diag([0.5, 1.0])
    return Analytic(
        name="half_x",
        params=(),
        domain=Rect.of(-2, -2, 2, 2),
        func=lambda p: p @ mat.T,
        jac=lambda p: np.broadcast_to(mat, (len(p), 2, 2)).copy(),
    )


class TestDomain:
    def test_evaluate_single_point(self, linear: GalleryEntry) -> None:
        assert evaluate(linear.map, Point2(1.0, -1.5)) == Point2(2.0, -1.5)

    def test_out_of_domain(self, identity: GalleryEntry) -> None:
        with pytest.raises(OutOfDomain, match="outside domain"):
            identity.map.evaluate_many(np.array([[2.5, 0.0]]))

    def test_within_tolerance_is_clipped(self, identity: GalleryEntry) -> None:
        tau = identity.map.tau_dom
        out = identity.map.evaluate_many(np.array([[2.0 + 0.5 * tau, 0.0]]))
        assert out[0, 0] == 2.0

    def test_point_shape_checked(self, identity: GalleryEntry) -> None:
        with pytest.raises(ValueError, match=r"\(N, 2\)"):
            identity.map.evaluate_many(np.zeros((4, 3)))


class TestPiecewiseAffine:
    def test_pieces_apply(self, two_piece_map: PiecewiseAffine) -> None:
        pts = np.array([[0.5, 0.5], [1.5, 0.25], [1.0, 0.5]])
        out = two_piece_map.evaluate_many(pts)
        assert out.tolist() == [[0.5, 0.5], [2.0, 0.25], [1.0, 0.5]]

    def test_jacobian(self, two_piece_map: PiecewiseAffine) -> None:
        jac = two_piece_map.jacobian_many(np.array([[0.5, 0.5], [1.5, 0.5]]))
        assert jac is not None
        assert jac[0].tolist() == [[1.0, 0.0], [0.0, 1.0]]
        assert jac[1].tolist() == [[2.0, 0.0], [0.0, 1.0]]

    def test_pieces_must_tile(self) -> None:
        piece = AffinePiece(
            np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]), np.eye(2), np.zeros(2)
        )
        with pytest.raises(ValueError, match="cover area"):
            PiecewiseAffine(Rect.of(0, 0, 2, 1), (piece,))

    def test_clockwise_polygon_rejected(self) -> None:
        with pytest.raises(ValueError, match="counterclockwise"):
            AffinePiece(
                np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]),
                np.eye(2),
                np.zeros(2),
            )


class TestGridSampled:
    def test_reproduces_affine_map(self) -> None:
        grid = Grid(Rect.of(0, 0, 4, 2), 8, 4)
        mat = np.array([[1.0, 0.5], [-0.25, 2.0]])
        values = (grid.centers() @ mat.T + [3.0, -1.0]).reshape(grid.ny, grid.nx, 2)
        gmap = GridSampled(grid, values)
        pts = np.array([[0.0, 0.0], [1.3, 0.7], [4.0, 2.0], [2.2, 1.9]])
        np.testing.assert_allclose(gmap.evaluate_many(pts), pts @ mat.T + [3.0, -1.0],
                                   atol=1e-12)

    def test_rejects_nan(self) -> None:
        grid = Grid(Rect.of(0, 0, 1, 1), 2, 2)
        values = np.zeros((2, 2, 2))
        values[0, 1, 0] = np.nan
        with pytest.raises(ValueError, match="finite"):
            GridSampled(grid, values)

    def test_rejects_wrong_shape(self) -> None:
        grid = Grid(Rect.of(0, 0, 1, 1), 2, 2)
        with pytest.raises(ValueError, match="shape"):
            GridSampled(grid, np.zeros((2, 3, 2)))


class TestComposition:
    def test_chain_rule(self, identity: GalleryEntry) -> None:
        comp = compose([_half_x(), identity.map], name="half_then_id")
        pts = np.array([[1.0, 1.0], [-2.0, 0.5]])
        assert comp.evaluate_many(pts).tolist() == [[0.5, 1.0], [-1.0, 0.5]]
        jac = comp.jacobian_many(pts)
        assert jac is not None
        np.testing.assert_allclose(jac[0], np.diag([0.5, 1.0]))
        assert comp.label == "half_then_id"

    def test_image_must_fit_next_domain(self, linear: GalleryEntry,
                                        identity: GalleryEntry) -> None:
        with pytest.raises(ValueError, match="not contained"):
            compose([linear.map, identity.map])

    def test_singular_points_collected(self, radial: GalleryEntry) -> None:
        comp = compose([radial.map], singular=[(0.5, 0.5)])
        assert comp.singular_points.tolist() == [[0.0, 0.0], [0.5, 0.5]]
