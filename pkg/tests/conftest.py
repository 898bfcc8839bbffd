# Copyright 2026 Harald Schilly <info@arjoma.at>, ARJOMA FlexCo.
# SPDX-License-Identifier: Apache-2.0

"""Shared test fixtures."""

from collections.abc import Iterator
from pathlib import Path

import numpy as np
import pytest

from invmap import parallel
from invmap.gallery import GalleryEntry, gallery_get
from invmap.geometry import Grid, Rect
from invmap.maps import AffinePiece, PiecewiseAffine

FIXTURES_DIR = Path(__file__).parent / "fixtures"


@pytest.fixture(autouse=True)
def _restore_threads() -> Iterator[None]:
    """Tests may cap the worker pool; put the default back afterwards."""
    yield
    parallel.set_threads(None)


@pytest.fixture
def identity() -> GalleryEntry:
    return gallery_get("identity")


@pytest.fixture
def linear() -> GalleryEntry:
    """diag(2, 1) on [-2,2]^2."""
    return gallery_get("linear(a=2,b=1)")


@pytest.fixture
def radial() -> GalleryEntry:
    return gallery_get("radial_cavitation")


@pytest.fixture
def bad() -> GalleryEntry:
    return gallery_get("bad_inv_nofd")


@pytest.fixture
def unit_grid() -> Grid:
    """64x64 cells on [-1,1]^2."""
    return Grid(Rect.of(-1, -1, 1, 1), 64, 64)


@pytest.fixture
def two_piece_map() -> PiecewiseAffine:
    """Identity on the left half of [0,2]x[0,1], x -> 2x - 1 on the right half."""
    left = AffinePiece(
        np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]), np.eye(2), np.zeros(2)
    )
    right = AffinePiece(
        np.array([[1.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0]]),
        np.array([[2.0, 0.0], [0.0, 1.0]]),
        np.array([-1.0, 0.0]),
    )
    return PiecewiseAffine(Rect.of(0, 0, 2, 1), (left, right), name="two-piece")
