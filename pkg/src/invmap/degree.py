# Copyright 2026 Harald Schilly <info@arjoma.at>, ARJOMA FlexCo.
# SPDX-License-Identifier: Apache-2.0

"""Boundary traces, winding numbers and rasterized topological images.

A loop is the image of a ball boundary under the map, sampled adaptively
until neighbouring image points are at most ``h_loop`` apart. Raster degrees
are exact integer crossing counts along a horizontal ray pointing right; an
edge crossing upwards counts +1, downwards -1. The single-point
``winding_number`` uses a compensated angle sum instead and checks that the
result is close to an integer.

Raster pixels snap to the lattice of the grid handed in, so two rasters built
from the same grid can be compared pixel by pixel.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.spatial import KDTree

from invmap import parallel
from invmap.errors import NonIntegerWinding, RefinementFloor, TooCloseToBoundary
from invmap.geometry import Ball, BoolArray, FloatArray, Grid, IntArray, Point2, Rect
from invmap.maps import PlanarMap

logger = logging.getLogger("invmap")

DELTA_FLOOR_REL = 1e-6
WINDING_RESIDUAL = 0.1
MAX_LOOP_SAMPLES = 1 << 20
INITIAL_SAMPLES = 64

Curve = Callable[[FloatArray], FloatArray]


@dataclass(frozen=True, eq=False)
class LoopImage:
    """Closed polyline f(gamma(t)); the last sample repeats the first."""

    samples: FloatArray  # (N+1, 2)
    source_params: FloatArray  # (N+1,), from 0 to 1

    def __post_init__(self) -> None:
        s = np.asarray(self.samples)
        if s.ndim != 2 or s.shape[1] != 2 or len(s) < 2:
            raise ValueError(f"Loop needs an (N+1, 2) sample array, got shape {s.shape}")
        if not np.array_equal(s[0], s[-1]):
            raise ValueError("Loop is not closed: first and last sample differ")
        if len(self.source_params) != len(s):
            raise ValueError("Loop samples and source parameters differ in length")

    @property
    def n_segments(self) -> int:
        return len(self.samples) - 1

    @property
    def spacing(self) -> float:
        """Largest distance between neighbouring samples."""
        d = np.diff(self.samples, axis=0)
        return float(np.max(np.hypot(d[:, 0], d[:, 1])))

    @property
    def degenerate(self) -> bool:
        """True if the loop collapsed to a single point."""
        extent = np.ptp(self.samples, axis=0)
        scale = 1.0 + float(np.max(np.abs(self.samples)))
        return bool(np.max(extent) <= 1e-12 * scale)

    def bbox_arrays(self) -> tuple[FloatArray, FloatArray]:
        return self.samples.min(axis=0), self.samples.max(axis=0)

    def densified(self, step: float) -> FloatArray:
        """Points along the polyline at most ``step`` apart."""
        a = self.samples[:-1]
        b = self.samples[1:]
        seg = np.hypot(*(b - a).T)
        n = np.maximum(1, np.ceil(seg / step)).astype(np.int64)
        idx = np.repeat(np.arange(len(a)), n)
        starts = np.repeat(np.cumsum(n) - n, n)
        frac = (np.arange(int(n.sum())) - starts) / np.repeat(n, n)
        pts = a[idx] + frac[:, None] * (b - a)[idx]
        return np.vstack([pts, self.samples[-1:]])

    def distance(self, points: FloatArray, step: float) -> FloatArray:
        """Distance from each point to the polyline, accurate to ``step / 2``."""
        tree = KDTree(self.densified(step))
        dist, _ = tree.query(np.atleast_2d(points))
        return np.asarray(dist, dtype=np.float64)


# --- boundary tracing ---


def _rect_curve(rect: Rect) -> tuple[Curve, FloatArray, float]:
    """Arc-length parametrization of the rectangle boundary from the bottom-left corner."""
    corners = rect.corners()
    sides = np.array([rect.width, rect.height, rect.width, rect.height])
    length = float(sides.sum())
    breaks = np.concatenate([[0.0], np.cumsum(sides)]) / length

    def curve(t: FloatArray) -> FloatArray:
        t = np.asarray(t, dtype=np.float64) % 1.0
        side = np.clip(np.searchsorted(breaks, t, side="right") - 1, 0, 3)
        u = (t - breaks[side]) / (breaks[side + 1] - breaks[side])
        a0 = corners[side]
        a1 = corners[(side + 1) % 4]
        return a0 + u[:, None] * (a1 - a0)  # type: ignore[no-any-return]

    return curve, breaks[:4], length


def _trace(
    fmap: PlanarMap,
    curve: Curve,
    fixed: FloatArray,
    length: float,
    floor: float,
    h_loop: float,
    what: str,
) -> LoopImage:
    if h_loop <= 0:
        raise ValueError(f"h_loop must be positive, got {h_loop}")
    n0 = max(INITIAL_SAMPLES, math.ceil(length / h_loop))
    t = np.union1d(np.arange(n0) / n0, fixed)
    t = np.append(t, 1.0)
    img = fmap.evaluate_many(curve(t))
    img[-1] = img[0]
    rounds = 0
    while True:
        gap = np.hypot(*np.diff(img, axis=0).T)
        step = np.diff(t) * length
        wide = gap > h_loop
        if not wide.any():
            break
        stuck = wide & (step / 2 < floor)
        if stuck.any():
            k = int(np.argmax(stuck))
            raise RefinementFloor(
                f"Boundary of {what} under {fmap.label}: image gap {gap[k]:.3g} > "
                f"h_loop={h_loop:.3g} at source step {step[k]:.3g} (possible discontinuity)"
            )
        mids = 0.5 * (t[:-1] + t[1:])[wide]
        if len(t) + len(mids) > MAX_LOOP_SAMPLES:
            raise RefinementFloor(
                f"Boundary of {what} under {fmap.label}: more than {MAX_LOOP_SAMPLES} samples"
            )
        new_img = fmap.evaluate_many(curve(mids))
        order = np.argsort(np.concatenate([t, mids]), kind="stable")
        t = np.concatenate([t, mids])[order]
        img = np.concatenate([img, new_img])[order]
        rounds += 1
    logger.debug(
        "Traced %s under %s: %d samples after %d refinement round(s)",
        what, fmap.label, len(t) - 1, rounds,
    )
    return LoopImage(img, t)


def trace_boundary(fmap: PlanarMap, ball: Ball, h_loop: float) -> LoopImage:
    """Adaptive image of the ball boundary, counterclockwise in the source."""
    if not fmap.domain.contains_rect(ball.bbox, tol=fmap.tau_dom):
        raise ValueError(f"Ball {ball} is not inside the domain of {fmap.label}")
    return _trace(
        fmap,
        ball.boundary_point,
        ball.corner_params(),
        ball.perimeter,
        DELTA_FLOOR_REL * ball.radius,
        h_loop,
        str(ball),
    )


def trace_rect(fmap: PlanarMap, rect: Rect, h_loop: float) -> LoopImage:
    """Adaptive image of a rectangle boundary, counterclockwise from the bottom-left corner."""
    curve, fixed, length = _rect_curve(rect)
    floor = DELTA_FLOOR_REL * 0.5 * min(rect.width, rect.height)
    return _trace(fmap, curve, fixed, length, floor, h_loop, "domain boundary")


# --- winding numbers ---


def segment_distance(loop: LoopImage, y: FloatArray) -> float:
    """Exact distance from a point to the loop polyline."""
    a = loop.samples[:-1]
    e = loop.samples[1:] - a
    ee = np.einsum("ij,ij->i", e, e)
    w = y - a
    u = np.where(ee > 0, np.einsum("ij,ij->i", w, e) / np.where(ee > 0, ee, 1.0), 0.0)
    u = np.clip(u, 0.0, 1.0)
    d = w - u[:, None] * e
    return float(np.min(np.hypot(d[:, 0], d[:, 1])))


def winding_number(loop: LoopImage, y: Point2, w_mask: float = 0.0) -> int:
    """Signed number of turns of the loop around ``y``."""
    yy = y.as_array()
    dist = segment_distance(loop, yy)
    if dist <= w_mask:
        raise TooCloseToBoundary(
            f"Point {y} is {dist:.3g} from the loop image (w_mask={w_mask:.3g})"
        )
    d = loop.samples - yy
    cross = d[:-1, 0] * d[1:, 1] - d[:-1, 1] * d[1:, 0]
    dot = np.einsum("ij,ij->i", d[:-1], d[1:])
    total = math.fsum(np.arctan2(cross, dot).tolist())
    turns = total / (2.0 * math.pi)
    k = round(turns)
    if abs(turns - k) >= WINDING_RESIDUAL:
        raise NonIntegerWinding(
            f"Angle sum around {y} is {turns:.4f} turns (loop under-refined?)"
        )
    return int(k)


def _edge_arrays(loop: LoopImage) -> tuple[FloatArray, FloatArray]:
    return loop.samples[:-1], loop.samples[1:]


def crossing_degree(loop: LoopImage, points: FloatArray) -> IntArray:
    """Crossing-count degree of the loop around each point (exact integers)."""
    p = np.atleast_2d(np.asarray(points, dtype=np.float64))
    a, b = _edge_arrays(loop)
    chunk = max(1, 4_000_000 // max(1, len(a)))

    def run(lo: int, hi: int) -> IntArray:
        px = p[lo:hi, 0:1]
        py = p[lo:hi, 1:2]
        up = (a[None, :, 1] <= py) & (py < b[None, :, 1])
        down = (b[None, :, 1] <= py) & (py < a[None, :, 1])
        dy = b[:, 1] - a[:, 1]
        safe = np.where(dy != 0, dy, 1.0)
        xc = a[None, :, 0] + (py - a[None, :, 1]) * ((b[:, 0] - a[:, 0]) / safe)[None, :]
        right = xc > px
        return np.sum(up & right, axis=1) - np.sum(down & right, axis=1)  # type: ignore[no-any-return]

    parts = parallel.map_chunks(run, len(p), chunk)
    if not parts:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate(parts).astype(np.int64)


def _row_degrees(a: FloatArray, b: FloatArray, y: float, xs: FloatArray) -> IntArray:
    up = (a[:, 1] <= y) & (y < b[:, 1])
    down = (b[:, 1] <= y) & (y < a[:, 1])
    hit = up | down
    if not hit.any():
        return np.zeros(len(xs), dtype=np.int64)
    ah, bh = a[hit], b[hit]
    xc = ah[:, 0] + (y - ah[:, 1]) * (bh[:, 0] - ah[:, 0]) / (bh[:, 1] - ah[:, 1])
    sign = np.where(up[hit], 1, -1)
    order = np.argsort(xc, kind="stable")
    xc, sign = xc[order], sign[order]
    suffix = np.concatenate([np.cumsum(sign[::-1])[::-1], [0]])
    return suffix[np.searchsorted(xc, xs, side="right")].astype(np.int64)  # type: ignore[no-any-return]


# --- rasters ---


@dataclass(frozen=True, eq=False)
class DegreeRaster:
    """Per-pixel degree over a window, with the pixels near the loop masked."""

    window: Rect
    grid: Grid
    deg: IntArray  # (ny, nx); meaningful only where ~near
    near: BoolArray  # (ny, nx): boundary_dist <= w_mask
    boundary_dist: FloatArray  # (ny, nx)
    w_mask: float
    offset: tuple[int, int]  # (column, row) of pixel (0, 0) in the anchor lattice

    @property
    def pixel_area(self) -> float:
        return self.grid.cell_area

    @property
    def imt(self) -> BoolArray:
        """Pixels of the topological image: nonzero degree, off the mask."""
        return (self.deg != 0) & ~self.near  # type: ignore[no-any-return]

    @property
    def e_set(self) -> BoolArray:
        return self.imt | self.near  # type: ignore[no-any-return]

    def lattice_slices(
        self, other: DegreeRaster
    ) -> tuple[tuple[slice, slice], tuple[slice, slice]]:
        """Index slices of the overlap of two rasters on the same lattice (self, other)."""
        c0 = max(self.offset[0], other.offset[0])
        r0 = max(self.offset[1], other.offset[1])
        c1 = min(self.offset[0] + self.grid.nx, other.offset[0] + other.grid.nx)
        r1 = min(self.offset[1] + self.grid.ny, other.offset[1] + other.grid.ny)
        c1, r1 = max(c1, c0), max(r1, r0)
        mine = (
            slice(r0 - self.offset[1], r1 - self.offset[1]),
            slice(c0 - self.offset[0], c1 - self.offset[0]),
        )
        theirs = (
            slice(r0 - other.offset[1], r1 - other.offset[1]),
            slice(c0 - other.offset[0], c1 - other.offset[0]),
        )
        return mine, theirs

    def lookup(self, points: FloatArray) -> tuple[IntArray, BoolArray, BoolArray]:
        """Degree, near flag and inside-window flag of the pixel holding each point."""
        i, j, inside = self.grid.cell_of(points)
        deg = np.where(inside, self.deg[j, i], 0)
        near = np.where(inside, self.near[j, i], False)
        return deg, near, inside


@dataclass(frozen=True, eq=False)
class TopImage:
    """Rasterized im_T(f, B) and E(f, B) = im_T u f(dB)."""

    raster: DegreeRaster
    loop: LoopImage
    imt_area: float
    e_area: float


def default_w_mask(grid: Grid) -> float:
    """Two pixel diagonals."""
    return 2.0 * grid.cell_diag


def default_h_loop(grid: Grid) -> float:
    return 0.5 * min(grid.dx, grid.dy)


def snapped_window(grid: Grid, lo: FloatArray, hi: FloatArray, pad_cells: int = 1) -> tuple[
    Grid, tuple[int, int]
]:
    """Raster grid on the lattice of ``grid`` covering [lo, hi] plus ``pad_cells`` cells."""
    ax, ay = grid.domain.min.x, grid.domain.min.y
    c0 = math.floor((lo[0] - ax) / grid.dx) - pad_cells
    c1 = math.ceil((hi[0] - ax) / grid.dx) + pad_cells
    r0 = math.floor((lo[1] - ay) / grid.dy) - pad_cells
    r1 = math.ceil((hi[1] - ay) / grid.dy) + pad_cells
    c1 = max(c1, c0 + 1)
    r1 = max(r1, r0 + 1)
    window = Rect.of(ax + c0 * grid.dx, ay + r0 * grid.dy, ax + c1 * grid.dx, ay + r1 * grid.dy)
    return Grid(window, c1 - c0, r1 - r0), (c0, r0)


def degree_raster(loop: LoopImage, grid: Grid, w_mask: float | None = None) -> DegreeRaster:
    """Rasterize the degree of ``loop`` on the lattice of ``grid``."""
    w = default_w_mask(grid) if w_mask is None else w_mask
    lo, hi = loop.bbox_arrays()
    rgrid, offset = snapped_window(grid, lo, hi)
    xs, ys = rgrid.xs(), rgrid.ys()
    a, b = _edge_arrays(loop)

    def rows(lo_row: int, hi_row: int) -> IntArray:
        return np.stack([_row_degrees(a, b, float(ys[r]), xs) for r in range(lo_row, hi_row)])

    deg = np.concatenate(parallel.map_chunks(rows, rgrid.ny, 16), axis=0)
    step = 0.25 * min(rgrid.dx, rgrid.dy)
    dist = loop.distance(rgrid.centers(), step).reshape(rgrid.shape)
    near = dist <= w
    return DegreeRaster(
        window=rgrid.domain,
        grid=rgrid,
        deg=deg,
        near=near,
        boundary_dist=dist,
        w_mask=w,
        offset=offset,
    )


def topological_image(
    fmap: PlanarMap,
    ball: Ball,
    grid: Grid,
    w_mask: float | None = None,
    h_loop: float | None = None,
) -> TopImage:
    """Trace the ball boundary and rasterize im_T and E on the pixel lattice of ``grid``."""
    loop = trace_boundary(fmap, ball, default_h_loop(grid) if h_loop is None else h_loop)
    raster = degree_raster(loop, grid, w_mask)
    px = raster.pixel_area
    imt_area = float(np.count_nonzero(raster.imt)) * px
    e_area = float(np.count_nonzero(raster.e_set)) * px
    logger.debug(
        "im_T of %s under %s: %.6g (E: %.6g) on %dx%d pixels",
        ball, fmap.label, imt_area, e_area, raster.grid.nx, raster.grid.ny,
    )
    return TopImage(raster=raster, loop=loop, imt_area=imt_area, e_area=e_area)
