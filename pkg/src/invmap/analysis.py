# Copyright 2026 Harald Schilly <info@arjoma.at>, ARJOMA FlexCo.
# SPDX-License-Identifier: Apache-2.0

"""First-order analysis of a planar map on a grid: Df, J_f, K_f and the good set."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from invmap import parallel
from invmap.geometry import BoolArray, FloatArray, Grid
from invmap.maps import PlanarMap

logger = logging.getLogger("invmap")

J_MIN_DEFAULT = 1e-8


def op_norm(jac: FloatArray) -> FloatArray:
    """Spectral norm of a stack of 2x2 matrices, closed form."""
    a, b = jac[..., 0, 0], jac[..., 0, 1]
    c, d = jac[..., 1, 0], jac[..., 1, 1]
    s = a * a + b * b + c * c + d * d
    det = a * d - b * c
    disc = np.sqrt(np.maximum(s * s - 4.0 * det * det, 0.0))
    return np.sqrt(0.5 * (s + disc))  # type: ignore[no-any-return]


def det2(jac: FloatArray) -> FloatArray:
    return jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]  # type: ignore[no-any-return]


def inv2(jac: FloatArray) -> FloatArray:
    """Inverse of a stack of invertible 2x2 matrices."""
    det = det2(jac)
    out = np.empty_like(jac)
    out[..., 0, 0] = jac[..., 1, 1]
    out[..., 0, 1] = -jac[..., 0, 1]
    out[..., 1, 0] = -jac[..., 1, 0]
    out[..., 1, 1] = jac[..., 0, 0]
    return out / det[..., None, None]  # type: ignore[no-any-return]


def distortion(jac: FloatArray) -> FloatArray:
    """K = |Df|^2 / J where J > 0; +inf where J <= 0 and Df != 0; 1 where Df = 0."""
    norm = op_norm(jac)
    jdet = det2(jac)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.where(jdet > 0, norm * norm / np.where(jdet > 0, jdet, 1.0), np.inf)
    k = np.where(jdet > 0, np.maximum(k, 1.0), k)
    return np.where(norm == 0.0, 1.0, k)  # type: ignore[no-any-return]


@dataclass(frozen=True, eq=False)
class MapAnalysis:
    """Per-cell Df, J_f, K_f and membership in the good set {J_f > j_min}."""

    grid: Grid
    jac: FloatArray  # (ny, nx, 2, 2)
    jdet: FloatArray  # (ny, nx)
    kdist: FloatArray  # (ny, nx), +inf where jdet <= 0 and jac != 0
    good: BoolArray  # (ny, nx)
    images: FloatArray  # (ny, nx, 2): f at the cell centers
    j_min: float = J_MIN_DEFAULT
    analytic: bool = False

    @property
    def good_fraction(self) -> float:
        return float(np.mean(self.good))

    def summary(self) -> dict[str, float]:
        """min/max/mean of J_f and of the finite K_f values, plus the good fraction."""
        finite = self.kdist[np.isfinite(self.kdist)]
        return {
            "jdet_min": float(self.jdet.min()),
            "jdet_max": float(self.jdet.max()),
            "jdet_mean": float(self.jdet.mean()),
            "kdist_min": float(finite.min()) if finite.size else float("nan"),
            "kdist_max": float(finite.max()) if finite.size else float("nan"),
            "kdist_mean": float(finite.mean()) if finite.size else float("nan"),
            "infinite_cells": float(np.count_nonzero(~np.isfinite(self.kdist))),
            "good_fraction": self.good_fraction,
        }


def analyze(fmap: PlanarMap, grid: Grid, j_min: float = J_MIN_DEFAULT) -> MapAnalysis:
    """Analyze ``fmap`` on ``grid``.

    Df comes from the map when it supplies an exact Jacobian, otherwise from
    finite differences between neighbouring cell centers (central inside,
    one-sided on the outermost ring). Cells whose closure holds a singular
    point of the map get Df = 0.
    """
    if j_min <= 0:
        raise ValueError(f"j_min must be positive, got {j_min}")
    if not fmap.domain.contains_rect(grid.domain, tol=fmap.tau_dom):
        raise ValueError(f"Grid domain is not inside the domain of {fmap.label}")

    centers = grid.centers()
    images = parallel.map_points(fmap.evaluate_many, centers)
    jac_flat = _exact_jacobian(fmap, centers)
    analytic = jac_flat is not None
    if jac_flat is None:
        if grid.nx < 2 or grid.ny < 2:
            raise ValueError("Finite differences need at least 2 cells per direction")
        vals = images.reshape(grid.ny, grid.nx, 2)
        dfdx = np.gradient(vals, grid.dx, axis=1)
        dfdy = np.gradient(vals, grid.dy, axis=0)
        jac = np.stack([dfdx, dfdy], axis=-1)  # jac[..., i, k] = d f_i / d x_k
    else:
        jac = jac_flat.reshape(grid.ny, grid.nx, 2, 2)
    jac = np.array(jac, dtype=np.float64)

    sing = fmap.singular_points
    if len(sing):
        for sx, sy in sing:
            ix = np.nonzero(np.abs(grid.xs() - sx) <= 0.5 * grid.dx)[0]
            iy = np.nonzero(np.abs(grid.ys() - sy) <= 0.5 * grid.dy)[0]
            jac[np.ix_(iy, ix)] = 0.0
            if len(ix) and len(iy):
                logger.debug(
                    "Singular point (%g, %g): %d cell(s) zeroed", sx, sy, len(ix) * len(iy)
                )

    jdet = det2(jac)
    kdist = distortion(jac)
    good = jdet > j_min
    logger.debug(
        "Analyzed %s on %dx%d cells (%s Df), good fraction %.4f",
        fmap.label, grid.nx, grid.ny, "exact" if analytic else "finite-difference",
        float(np.mean(good)),
    )
    return MapAnalysis(
        grid=grid,
        jac=jac,
        jdet=jdet,
        kdist=kdist,
        good=good,
        images=images.reshape(grid.ny, grid.nx, 2),
        j_min=j_min,
        analytic=analytic,
    )


def _exact_jacobian(fmap: PlanarMap, centers: FloatArray) -> FloatArray | None:
    probe = fmap.jacobian_many(centers[:1])
    if probe is None:
        return None

    def chunk(p: FloatArray) -> FloatArray:
        jac = fmap.jacobian_many(p)
        assert jac is not None
        return jac

    return parallel.map_points(chunk, centers)


def inner_distortion(analysis: MapAnalysis) -> FloatArray:
    """Inner distortion K_I per cell.

    In the plane the cofactor matrix of Df is Df rotated by a quarter turn, so
    it has the same singular values and K_I equals K_f cell by cell. The
    kdist array is returned unchanged.
    """
    return analysis.kdist
