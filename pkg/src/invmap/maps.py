# Copyright 2026 Harald Schilly <info@arjoma.at>, ARJOMA FlexCo.
# SPDX-License-Identifier: Apache-2.0

"""Planar mappings: analytic, piecewise-affine, grid-sampled and compositions.

Every variant evaluates whole (N, 2) point arrays at once. Points may stray
outside the domain by at most ``tau_dom = 1e-9 * diam(domain)``; they are then
clipped onto the domain before evaluation. Anything further out raises
OutOfDomain.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from invmap.errors import OutOfDomain
from invmap.geometry import Ball, FloatArray, Grid, Point2, Rect

logger = logging.getLogger("invmap")

TAU_DOM_REL = 1e-9

PointFunc = Callable[[FloatArray], FloatArray]


class PlanarMap(ABC):
    """A mapping from a rectangle into the plane."""

    domain: Rect
    boundary_homeo: bool

    @property
    def tau_dom(self) -> float:
        return TAU_DOM_REL * self.domain.diam

    @property
    def singular_points(self) -> FloatArray:
        """Points where the derivative does not exist, shape (k, 2)."""
        return np.empty((0, 2))

    @property
    def omega(self) -> Ball | None:
        """Optional disk Omega inside the rectangular domain."""
        return None

    @property
    @abstractmethod
    def label(self) -> str:
        """Short human-readable description."""

    def evaluate_many(self, points: FloatArray) -> FloatArray:
        p = self._checked(points)
        return self._apply(p)

    def jacobian_many(self, points: FloatArray) -> FloatArray | None:
        """Exact Df as an (N, 2, 2) array, or None if only finite differences apply."""
        p = self._checked(points)
        return self._jacobian(p)

    @abstractmethod
    def _apply(self, p: FloatArray) -> FloatArray: ...

    def _jacobian(self, p: FloatArray) -> FloatArray | None:
        return None

    def _checked(self, points: FloatArray) -> FloatArray:
        p = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if p.shape[1] != 2:
            raise ValueError(f"Expected an (N, 2) point array, got shape {p.shape}")
        ok = self.domain.contains(p, tol=self.tau_dom)
        if not np.all(ok):
            bad = p[~ok][0]
            raise OutOfDomain(
                f"Point ({bad[0]:.6g}, {bad[1]:.6g}) outside domain "
                f"[{self.domain.min.x:g},{self.domain.max.x:g}]x"
                f"[{self.domain.min.y:g},{self.domain.max.y:g}] of {self.label}"
            )
        lo = (self.domain.min.x, self.domain.min.y)
        hi = (self.domain.max.x, self.domain.max.y)
        return np.clip(p, lo, hi)


def evaluate(fmap: PlanarMap, p: Point2) -> Point2:
    """f(p) for a single point."""
    return Point2.of(fmap.evaluate_many(p.as_array()[None, :])[0])


@dataclass(frozen=True, eq=False)
class Analytic(PlanarMap):
    """Closed-form map from the gallery."""

    name: str
    params: tuple[tuple[str, float], ...]
    domain: Rect
    func: PointFunc
    jac: PointFunc | None = None
    boundary_homeo: bool = True
    singular: tuple[tuple[float, float], ...] = ()
    omega_ball: Ball | None = None

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        args = ",".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.name}({args})"

    @property
    def singular_points(self) -> FloatArray:
        return np.array(self.singular, dtype=np.float64).reshape(-1, 2)

    @property
    def omega(self) -> Ball | None:
        return self.omega_ball

    def _apply(self, p: FloatArray) -> FloatArray:
        return self.func(p)

    def _jacobian(self, p: FloatArray) -> FloatArray | None:
        return None if self.jac is None else self.jac(p)


@dataclass(frozen=True)
class AffinePiece:
    """Convex polygon (counterclockwise) carrying the affine map ``x -> A x + b``."""

    polygon: FloatArray
    matrix: FloatArray
    offset: FloatArray

    def __post_init__(self) -> None:
        poly = np.asarray(self.polygon, dtype=np.float64)
        if poly.ndim != 2 or poly.shape[1] != 2 or len(poly) < 3:
            raise ValueError(f"Piece polygon needs >= 3 vertices, got shape {poly.shape}")
        if _signed_area(poly) <= 0:
            raise ValueError("Piece polygon must be counterclockwise with positive area")
        if np.shape(self.matrix) != (2, 2) or np.shape(self.offset) != (2,):
            raise ValueError("Piece needs a 2x2 matrix and a length-2 offset")

    @property
    def area(self) -> float:
        return _signed_area(np.asarray(self.polygon))

    def outside_distance(self, p: FloatArray) -> FloatArray:
        """Largest signed distance of each point outside the edge lines (<= 0 inside)."""
        poly = np.asarray(self.polygon)
        a = poly
        b = np.roll(poly, -1, axis=0)
        e = b - a
        length = np.hypot(e[:, 0], e[:, 1])
        # cross(e, p - a) >= 0 on the inner side of a counterclockwise edge
        cross = e[None, :, 0] * (p[:, None, 1] - a[None, :, 1]) - e[None, :, 1] * (
            p[:, None, 0] - a[None, :, 0]
        )
        return np.max(-cross / length[None, :], axis=1)  # type: ignore[no-any-return]


def _signed_area(poly: FloatArray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


@dataclass(frozen=True, eq=False)
class PiecewiseAffine(PlanarMap):
    """Affine on each convex piece; the pieces tile the domain."""

    domain: Rect
    pieces: tuple[AffinePiece, ...]
    boundary_homeo: bool = True
    name: str = "pwa"

    def __post_init__(self) -> None:
        if not self.pieces:
            raise ValueError("PiecewiseAffine needs at least one piece")
        total = sum(pc.area for pc in self.pieces)
        if abs(total - self.domain.area) > 1e-9 * self.domain.area:
            raise ValueError(
                f"Pieces cover area {total:.12g}, domain area is {self.domain.area:.12g}"
            )

    @property
    def label(self) -> str:
        return self.name

    def piece_index(self, p: FloatArray) -> np.ndarray:
        """Index of the first piece containing each point (nearest piece as fallback)."""
        dist = np.stack([pc.outside_distance(p) for pc in self.pieces])
        inside = dist <= self.tau_dom
        first = np.argmax(inside, axis=0)
        nearest = np.argmin(dist, axis=0)
        return np.where(inside.any(axis=0), first, nearest)

    def _apply(self, p: FloatArray) -> FloatArray:
        idx = self.piece_index(p)
        mats = np.stack([np.asarray(pc.matrix) for pc in self.pieces])[idx]
        offs = np.stack([np.asarray(pc.offset) for pc in self.pieces])[idx]
        return np.einsum("nij,nj->ni", mats, p) + offs  # type: ignore[no-any-return]

    def _jacobian(self, p: FloatArray) -> FloatArray | None:
        idx = self.piece_index(p)
        return np.stack([np.asarray(pc.matrix) for pc in self.pieces])[idx]  # type: ignore[no-any-return]


@dataclass(frozen=True, eq=False)
class GridSampled(PlanarMap):
    """Values at cell centers of a grid, bilinear in between.

    The half-cell rim outside the outermost centers is extrapolated linearly.
    """

    grid: Grid
    values: FloatArray  # shape (ny, nx, 2)
    boundary_homeo: bool = False
    name: str = "gridmap"

    def __post_init__(self) -> None:
        v = np.asarray(self.values)
        if v.shape != (self.grid.ny, self.grid.nx, 2):
            raise ValueError(
                f"GridSampled values need shape {(self.grid.ny, self.grid.nx, 2)}, got {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("GridSampled values must be finite at every node")

    @property
    def domain(self) -> Rect:  # type: ignore[override]
        return self.grid.domain

    @property
    def label(self) -> str:
        return self.name

    def _axis(self, coord: FloatArray, lo: float, step: float, n: int) -> tuple[
        np.ndarray, np.ndarray, FloatArray
    ]:
        if n == 1:
            zero = np.zeros(len(coord), dtype=np.int64)
            return zero, zero, np.zeros(len(coord))
        u = (coord - lo) / step - 0.5
        i0 = np.clip(np.floor(u), 0, n - 2).astype(np.int64)
        return i0, i0 + 1, u - i0

    def _apply(self, p: FloatArray) -> FloatArray:
        g = self.grid
        v = np.asarray(self.values)
        i0, i1, t = self._axis(p[:, 0], g.domain.min.x, g.dx, g.nx)
        j0, j1, s = self._axis(p[:, 1], g.domain.min.y, g.dy, g.ny)
        t = t[:, None]
        s = s[:, None]
        return (  # type: ignore[no-any-return]
            (1 - t) * (1 - s) * v[j0, i0]
            + t * (1 - s) * v[j0, i1]
            + (1 - t) * s * v[j1, i0]
            + t * s * v[j1, i1]
        )


@dataclass(frozen=True, eq=False)
class Composition(PlanarMap):
    """Left-to-right composition: ``parts[-1] o ... o parts[0]``."""

    parts: tuple[PlanarMap, ...]
    boundary_homeo: bool = True
    name: str = ""
    singular: tuple[tuple[float, float], ...] = ()
    checked: bool = field(default=True, repr=False)

    def __post_init__(self) -> None:
        if not self.parts:
            raise ValueError("Composition needs at least one map")
        if self.checked:
            self._check_chain()

    @property
    def domain(self) -> Rect:  # type: ignore[override]
        return self.parts[0].domain

    @property
    def label(self) -> str:
        return self.name or " | ".join(m.label for m in self.parts)

    @property
    def singular_points(self) -> FloatArray:
        extra = np.array(self.singular, dtype=np.float64).reshape(-1, 2)
        return np.vstack([self.parts[0].singular_points, extra])

    def _check_chain(self) -> None:
        probe = Grid(self.parts[0].domain, 64, 64).centers()
        probe = np.vstack([probe, self.parts[0].domain.corners()])
        for prev, nxt in zip(self.parts, self.parts[1:]):
            probe = prev.evaluate_many(probe)
            image = Rect.bounding(probe)
            if not nxt.domain.contains_rect(image, tol=nxt.tau_dom):
                raise ValueError(
                    f"Image of {prev.label} is not contained in the domain of {nxt.label}"
                )

    def _apply(self, p: FloatArray) -> FloatArray:
        for part in self.parts:
            p = part.evaluate_many(p)
        return p

    def _jacobian(self, p: FloatArray) -> FloatArray | None:
        total: FloatArray | None = None
        for part in self.parts:
            jac = part.jacobian_many(p)
            if jac is None:
                return None
            total = jac if total is None else np.einsum("nij,njk->nik", jac, total)
            p = part.evaluate_many(p)
        return total


def compose(
    maps: Sequence[PlanarMap],
    name: str = "",
    singular: Sequence[tuple[float, float]] = (),
) -> Composition:
    """Compose left to right. ``singular`` adds source points where Df does not exist."""
    return Composition(
        tuple(maps),
        boundary_homeo=all(m.boundary_homeo for m in maps),
        name=name,
        singular=tuple(singular),
    )
