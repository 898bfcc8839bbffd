# Copyright 2026 Harald Schilly <info@arjoma.at>, ARJOMA FlexCo.
# SPDX-License-Identifier: Apache-2.0

"""Points, rectangles, grids and balls."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]
IntArray = NDArray[np.int64]
BoolArray = NDArray[np.bool_]


@dataclass(frozen=True)
class Point2:
    """A point in the plane."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"Point2 coordinates must be finite, got ({self.x}, {self.y})")

    def as_array(self) -> FloatArray:
        return np.array([self.x, self.y], dtype=np.float64)

    @classmethod
    def of(cls, xy: FloatArray | tuple[float, float]) -> Point2:
        return cls(float(xy[0]), float(xy[1]))

    @classmethod
    def parse(cls, text: str) -> Point2:
        """Parse ``"x,y"`` as used on the command line."""
        parts = text.split(",")
        if len(parts) != 2:
            raise ValueError(f"Expected 'x,y', got {text!r}")
        return cls(float(parts[0]), float(parts[1]))

    def __str__(self) -> str:
        return f"({self.x:g}, {self.y:g})"


@dataclass(frozen=True)
class Rect:
    """Closed axis-aligned rectangle."""

    min: Point2
    max: Point2

    def __post_init__(self) -> None:
        if not (self.min.x < self.max.x and self.min.y < self.max.y):
            raise ValueError(f"Rect needs min < max, got {self.min} .. {self.max}")

    @classmethod
    def of(cls, minx: float, miny: float, maxx: float, maxy: float) -> Rect:
        return cls(Point2(minx, miny), Point2(maxx, maxy))

    @classmethod
    def bounding(cls, points: FloatArray, pad: float = 0.0) -> Rect:
        """Bounding box of an (N, 2) array, grown by ``pad`` on every side."""
        lo = points.min(axis=0) - pad
        hi = points.max(axis=0) + pad
        return cls.of(float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))

    @property
    def width(self) -> float:
        return self.max.x - self.min.x

    @property
    def height(self) -> float:
        return self.max.y - self.min.y

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def diam(self) -> float:
        return math.hypot(self.width, self.height)

    @property
    def center(self) -> Point2:
        return Point2(0.5 * (self.min.x + self.max.x), 0.5 * (self.min.y + self.max.y))

    def contains(self, points: FloatArray, tol: float = 0.0) -> BoolArray:
        p = np.atleast_2d(points)
        return (  # type: ignore[no-any-return]
            (p[:, 0] >= self.min.x - tol)
            & (p[:, 0] <= self.max.x + tol)
            & (p[:, 1] >= self.min.y - tol)
            & (p[:, 1] <= self.max.y + tol)
        )

    def contains_rect(self, other: Rect, tol: float = 0.0) -> bool:
        return (
            other.min.x >= self.min.x - tol
            and other.min.y >= self.min.y - tol
            and other.max.x <= self.max.x + tol
            and other.max.y <= self.max.y + tol
        )

    def union(self, other: Rect) -> Rect:
        return Rect.of(
            min(self.min.x, other.min.x),
            min(self.min.y, other.min.y),
            max(self.max.x, other.max.x),
            max(self.max.y, other.max.y),
        )

    def intersect(self, other: Rect) -> Rect:
        """Intersection; raises ValueError if it is empty."""
        return Rect.of(
            max(self.min.x, other.min.x),
            max(self.min.y, other.min.y),
            min(self.max.x, other.max.x),
            min(self.max.y, other.max.y),
        )

    def grow(self, pad: float) -> Rect:
        return Rect.of(self.min.x - pad, self.min.y - pad, self.max.x + pad, self.max.y + pad)

    def corners(self) -> FloatArray:
        """Corners counterclockwise from the bottom-left one."""
        return np.array(
            [
                [self.min.x, self.min.y],
                [self.max.x, self.min.y],
                [self.max.x, self.max.y],
                [self.min.x, self.max.y],
            ]
        )


@dataclass(frozen=True)
class Grid:
    """Uniform nx-by-ny cell grid over a rectangle. Samples live at cell centers."""

    domain: Rect
    nx: int
    ny: int

    def __post_init__(self) -> None:
        if self.nx < 1 or self.ny < 1:
            raise ValueError(f"Grid needs nx, ny >= 1, got {self.nx} x {self.ny}")

    @classmethod
    def square_cells(cls, domain: Rect, cell: float) -> Grid:
        """Grid whose cells are (close to) ``cell`` wide in both directions."""
        nx = max(1, math.ceil(domain.width / cell))
        ny = max(1, math.ceil(domain.height / cell))
        return cls(domain, nx, ny)

    @property
    def dx(self) -> float:
        return self.domain.width / self.nx

    @property
    def dy(self) -> float:
        return self.domain.height / self.ny

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def cell_diag(self) -> float:
        return math.hypot(self.dx, self.dy)

    @property
    def size(self) -> int:
        return self.nx * self.ny

    @property
    def shape(self) -> tuple[int, int]:
        """Array shape (ny, nx): rows run over y, columns over x."""
        return (self.ny, self.nx)

    def xs(self) -> FloatArray:
        return self.domain.min.x + (np.arange(self.nx) + 0.5) * self.dx

    def ys(self) -> FloatArray:
        return self.domain.min.y + (np.arange(self.ny) + 0.5) * self.dy

    def centers(self) -> FloatArray:
        """Cell centers as an (ny*nx, 2) array in row-major order (x fastest)."""
        gx, gy = np.meshgrid(self.xs(), self.ys())
        return np.column_stack([gx.ravel(), gy.ravel()])

    def cell_of(self, points: FloatArray) -> tuple[IntArray, IntArray, BoolArray]:
        """Column, row and inside-flag of the cell containing each point."""
        p = np.atleast_2d(points)
        fi = np.floor((p[:, 0] - self.domain.min.x) / self.dx)
        fj = np.floor((p[:, 1] - self.domain.min.y) / self.dy)
        # points on the max edge belong to the last cell
        fi = np.where(p[:, 0] == self.domain.max.x, self.nx - 1, fi)
        fj = np.where(p[:, 1] == self.domain.max.y, self.ny - 1, fj)
        inside = (fi >= 0) & (fi < self.nx) & (fj >= 0) & (fj < self.ny)
        i = np.clip(fi, 0, self.nx - 1).astype(np.int64)
        j = np.clip(fj, 0, self.ny - 1).astype(np.int64)
        return i, j, inside

    def refined(self, factor: int) -> Grid:
        return Grid(self.domain, self.nx * factor, self.ny * factor)


class BallShape(str, Enum):
    DISK = "disk"
    SQUARE = "square"


@dataclass(frozen=True)
class Ball:
    """Euclidean disk or sup-norm square ``B(center, radius)``."""

    center: Point2
    radius: float
    shape: BallShape = BallShape.DISK

    def __post_init__(self) -> None:
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError(f"Ball radius must be positive, got {self.radius}")

    @property
    def bbox(self) -> Rect:
        c, r = self.center, self.radius
        return Rect.of(c.x - r, c.y - r, c.x + r, c.y + r)

    @property
    def area(self) -> float:
        if self.shape is BallShape.SQUARE:
            return 4.0 * self.radius**2
        return math.pi * self.radius**2

    @property
    def perimeter(self) -> float:
        if self.shape is BallShape.SQUARE:
            return 8.0 * self.radius
        return 2.0 * math.pi * self.radius

    def _norm(self, points: FloatArray) -> FloatArray:
        d = np.atleast_2d(points) - self.center.as_array()
        if self.shape is BallShape.SQUARE:
            return np.max(np.abs(d), axis=1)  # type: ignore[no-any-return]
        return np.hypot(d[:, 0], d[:, 1])  # type: ignore[no-any-return]

    def contains(self, points: FloatArray, closed: bool = True) -> BoolArray:
        n = self._norm(points)
        return n <= self.radius if closed else n < self.radius  # type: ignore[no-any-return]

    def contains_ball(self, other: Ball) -> bool:
        """Containment of closures, exact for equal shapes and conservative otherwise."""
        d = other.center.as_array() - self.center.as_array()
        if self.shape is other.shape:
            dist = float(np.max(np.abs(d))) if self.shape is BallShape.SQUARE else float(
                np.hypot(*d)
            )
            return dist + other.radius <= self.radius * (1 + 1e-12)
        return bool(np.all(self.contains(other.outline(64))))

    def disjoint_from(self, other: Ball) -> bool:
        """True if the closures do not meet."""
        d = other.center.as_array() - self.center.as_array()
        if self.shape is BallShape.SQUARE and other.shape is BallShape.SQUARE:
            return float(np.max(np.abs(d))) > self.radius + other.radius
        if self.shape is BallShape.DISK and other.shape is BallShape.DISK:
            return float(np.hypot(*d)) > self.radius + other.radius
        return not bool(np.any(self.contains(other.outline(256))))

    def interiors_disjoint(self, other: Ball) -> bool:
        d = other.center.as_array() - self.center.as_array()
        if self.shape is BallShape.SQUARE and other.shape is BallShape.SQUARE:
            return float(np.max(np.abs(d))) >= self.radius + other.radius
        if self.shape is BallShape.DISK and other.shape is BallShape.DISK:
            return float(np.hypot(*d)) >= self.radius + other.radius
        return self.disjoint_from(other)

    def boundary_point(self, t: FloatArray) -> FloatArray:
        """Boundary parametrized by ``t`` in [0, 1), counterclockwise.

        Disks start at angle 0; squares start at the bottom-left corner.
        """
        t = np.asarray(t, dtype=np.float64) % 1.0
        c = self.center.as_array()
        r = self.radius
        if self.shape is BallShape.DISK:
            a = 2.0 * math.pi * t
            return c + r * np.column_stack([np.cos(a), np.sin(a)])
        s = 4.0 * t
        side = np.minimum(np.floor(s), 3).astype(np.int64)
        u = s - side
        corners = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
        a0 = corners[side]
        a1 = corners[(side + 1) % 4]
        return c + r * (a0 + u[:, None] * (a1 - a0))  # type: ignore[no-any-return]

    def corner_params(self) -> FloatArray:
        """Boundary parameters that must always be sampled (square corners)."""
        if self.shape is BallShape.SQUARE:
            return np.array([0.0, 0.25, 0.5, 0.75])
        return np.array([0.0])

    def outline(self, n: int) -> FloatArray:
        return self.boundary_point(np.arange(n) / n)

    def lattice(self, n: int) -> FloatArray:
        """Stratified lattice of roughly ``n`` points in the closed ball."""
        h = math.sqrt(self.area / n)
        m = max(1, math.ceil(2 * self.radius / h))
        offs = (np.arange(m) + 0.5) / m * 2 * self.radius - self.radius
        gx, gy = np.meshgrid(offs + self.center.x, offs + self.center.y)
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        return pts[self.contains(pts)]  # type: ignore[no-any-return]

    def scaled(self, radius: float) -> Ball:
        return Ball(self.center, radius, self.shape)

    def __str__(self) -> str:
        kind = "Q" if self.shape is BallShape.SQUARE else "B"
        return f"{kind}({self.center.x:g},{self.center.y:g};{self.radius:g})"


def rect_lattice(rect: Rect, n: int) -> FloatArray:
    """Stratified lattice of roughly ``n`` points covering a rectangle."""
    h = math.sqrt(rect.area / n)
    mx = max(1, round(rect.width / h))
    my = max(1, round(rect.height / h))
    return Grid(rect, mx, my).centers()


def radius_schedule(r_max: float, count: int = 8, factor: float = 0.75) -> list[float]:
    """Geometric radii ``r_max * factor**k`` for k = 0 .. count-1."""
    return [r_max * factor**k for k in range(count)]
