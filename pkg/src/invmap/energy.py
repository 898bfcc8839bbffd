# Copyright 2026 Harald Schilly <info@arjoma.at>, ARJOMA FlexCo.
# SPDX-License-Identifier: Apache-2.0

"""Energy identity for the inverse, key diameter estimate and oscillation probes.

All quadratures are midpoint rules per cell. Sums run in row-major order
through ``parallel.ordered_sum``, so results do not depend on the number of
worker threads.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, KDTree, QhullError
from scipy.spatial.distance import pdist

from invmap import parallel
from invmap.analysis import J_MIN_DEFAULT, MapAnalysis, analyze, det2, op_norm
from invmap.degree import crossing_degree, trace_boundary, trace_rect
from invmap.errors import NoPreimage, TooManyUndefined
from invmap.geometry import BoolArray, FloatArray, Grid, Point2, Rect
from invmap.inverse import (
    KAPPA_JUMP_DEFAULT,
    InverseMap,
    Provenance,
    build_inverse,
    inverse_jacobian,
    jump_adjacent,
)
from invmap.maps import PlanarMap

logger = logging.getLogger("invmap")

MAX_MASKED = 0.05
REL_EPS = 1e-12
DIVERGENCE_GROWTH = 1.5


@dataclass
class DirichletTerms:
    """Dirichlet energy of h with the bookkeeping of masked cells."""

    value: float
    cells: int  # cells inside the integration region
    masked_cells: int  # undefined, derivative-free or jump-adjacent
    jump_cells: int
    jump_energy: float  # energy of the jump-adjacent cells, left out of ``value``


@dataclass
class EnergyReport:
    lhs: float  # integral of |Dh|^2 over the target
    rhs: float  # integral of K_f over the good part of the source
    rel_err: float
    resolution: tuple[int, int]
    masked_cells: int
    jump_cells: int = 0
    jump_energy: float = 0.0

    def ok(self, tol: float) -> bool:
        return self.rel_err <= tol


def dirichlet_terms(
    inv: InverseMap,
    within: BoolArray | None = None,
    kappa_jump: float = KAPPA_JUMP_DEFAULT,
    max_masked: float = MAX_MASKED,
) -> DirichletTerms:
    """Integrate |Dh|^2 (operator norm) over ``within`` (default: every cell).

    Raises TooManyUndefined if more than ``max_masked`` of the region is masked.
    """
    region = np.ones(inv.grid.shape, dtype=bool) if within is None else within
    jac, valid = inverse_jacobian(inv)
    jumps = jump_adjacent(inv, kappa_jump) & region
    usable = region & valid & inv.defined & ~jumps
    n_region = int(np.count_nonzero(region))
    masked = n_region - int(np.count_nonzero(usable))
    if n_region and masked / n_region > max_masked:
        raise TooManyUndefined(
            f"{masked} of {n_region} cells masked ({100 * masked / n_region:.1f}% > "
            f"{100 * max_masked:g}%)"
        )
    dens = op_norm(jac) ** 2
    area = inv.grid.cell_area
    value = parallel.ordered_sum(dens[usable]) * area
    jump_ok = jumps & valid & inv.defined
    jump_energy = parallel.ordered_sum(dens[jump_ok]) * area
    return DirichletTerms(
        value=value,
        cells=n_region,
        masked_cells=masked,
        jump_cells=int(np.count_nonzero(jumps)),
        jump_energy=jump_energy,
    )


def dirichlet_energy(
    inv: InverseMap,
    within: BoolArray | None = None,
    kappa_jump: float = KAPPA_JUMP_DEFAULT,
) -> float:
    """Midpoint quadrature of |Dh|^2 with undefined and jump-adjacent cells masked."""
    return dirichlet_terms(inv, within, kappa_jump).value


def distortion_integral(analysis: MapAnalysis, within: BoolArray | None = None) -> float:
    """Midpoint quadrature of K_f over the good cells (inside ``within``)."""
    mask = analysis.good if within is None else analysis.good & within
    return parallel.ordered_sum(analysis.kdist[mask]) * analysis.grid.cell_area


def energy_identity(
    fmap: PlanarMap,
    grid: Grid,
    j_min: float = J_MIN_DEFAULT,
    kappa_jump: float = KAPPA_JUMP_DEFAULT,
    rho0: float | None = None,
    delta_cav: float | None = None,
) -> EnergyReport:
    """Compare the Dirichlet energy of h with the distortion integral of f.

    Omega is the disk declared by the map, or else the grid domain. The
    target grid is the bounding box of f(dOmega) at the same resolution, and
    the energy of h is taken over the cells enclosed by f(dOmega).
    """
    logger.info("Energy identity for %s on %dx%d cells", fmap.label, grid.nx, grid.ny)
    analysis = analyze(fmap, grid, j_min)
    h_loop = 0.5 * min(grid.dx, grid.dy)
    omega = fmap.omega
    if omega is not None:
        loop = trace_boundary(fmap, omega, h_loop)
        within_src = omega.contains(grid.centers()).reshape(grid.shape)
    else:
        loop = trace_rect(fmap, grid.domain, h_loop)
        within_src = np.ones(grid.shape, dtype=bool)

    target = Grid(Rect.bounding(loop.samples), grid.nx, grid.ny)
    inv = build_inverse(fmap, analysis, target, rho0=rho0, delta_cav=delta_cav)
    within_tgt = crossing_degree(loop, target.centers()).reshape(target.shape) != 0

    terms = dirichlet_terms(inv, within_tgt, kappa_jump)
    rhs = distortion_integral(analysis, within_src)
    lhs = terms.value
    rel = abs(lhs - rhs) / max(abs(rhs), REL_EPS)
    logger.info("Energy: lhs=%.6g rhs=%.6g rel_err=%.3g", lhs, rhs, rel)
    return EnergyReport(
        lhs=lhs,
        rhs=rhs,
        rel_err=rel,
        resolution=(grid.nx, grid.ny),
        masked_cells=terms.masked_cells,
        jump_cells=terms.jump_cells,
        jump_energy=terms.jump_energy,
    )


def diverging(reports: Sequence[EnergyReport], growth: float = DIVERGENCE_GROWTH) -> bool:
    """True if the jump energy grows by ``growth`` or more at every refinement step."""
    if len(reports) < 2:
        return False
    vals = [r.jump_energy for r in reports]
    return all(b >= growth * a and b > 0 for a, b in zip(vals, vals[1:]))


# --- key estimate ---


def diameter(points: FloatArray) -> float:
    """Largest pairwise distance, via the convex hull when it exists."""
    if len(points) < 2:
        return 0.0
    pts = points
    if len(points) > 3:
        try:
            pts = points[ConvexHull(points).vertices]
        except QhullError:  # collinear
            lo = np.argmin(points, axis=0)
            hi = np.argmax(points, axis=0)
            pts = points[np.unique(np.concatenate([lo, hi]))]
    return float(np.max(pdist(pts)))


@dataclass
class KeyEstimateProbe:
    """Terms of the diameter estimate for preimages of balls B(center, r)."""

    center: Point2
    radii: list[float]
    p: float
    lhs_diam: list[float] = field(default_factory=list)
    measure_2r: list[float] = field(default_factory=list)
    energy_2r: list[float] = field(default_factory=list)
    phi_2r: list[float] = field(default_factory=list)
    ratio: list[float] = field(default_factory=list)

    @property
    def density_2r(self) -> list[float]:
        """|f^-1(B_2r)| / |B_2r|, the set-function derivative proxy."""
        return [m / (math.pi * (2 * r) ** 2) for m, r in zip(self.measure_2r, self.radii)]

    def spread(self) -> float:
        """max / min of the positive ratios (inf if fewer than one)."""
        pos = [x for x in self.ratio if x > 0]
        return max(pos) / min(pos) if pos else math.inf


def _phi_integral(
    fmap: PlanarMap, analysis: MapAnalysis, inv: InverseMap, center: FloatArray, r: float, p: float
) -> float:
    """Integral over B(center, r) of |Df(h)|^p / J_f(h) on graph cells of h."""
    ys = inv.grid.centers()
    graph = (inv.provenance == Provenance.GRAPH).ravel()
    inside = graph & (np.hypot(*(ys - center).T) <= r)
    if not inside.any():
        return 0.0
    hx = inv.values.reshape(-1, 2)[inside]
    jac = fmap.jacobian_many(hx)
    if jac is None:
        i, j, _ = analysis.grid.cell_of(hx)
        jac = analysis.jac[j, i]
    jdet = det2(jac)
    ok = jdet > analysis.j_min
    dens = np.where(ok, op_norm(jac) ** p / np.where(ok, jdet, 1.0), 0.0)
    return parallel.ordered_sum(dens) * inv.grid.cell_area


def key_estimate_probe(
    fmap: PlanarMap,
    inv: InverseMap,
    center: Point2,
    radii: Sequence[float],
    p: float,
    analysis: MapAnalysis | None = None,
) -> KeyEstimateProbe:
    """Diameter of f^-1(B_r) against r^-1 |f^-1(B_2r)|^((p-1)/p) (int |Df|^p)^(1/p).

    Radii without any preimage report zeros. NoPreimage is raised (carrying
    the all-zero probe) when no radius has one.
    """
    if p <= 1:
        raise ValueError(f"p must be > 1, got {p}")
    a = analysis if analysis is not None else inv.source
    if a is None:
        raise ValueError("key_estimate_probe needs the source analysis")
    window = inv.grid.domain
    for r in radii:
        if not window.contains_rect(Rect.of(
            center.x - 3 * r, center.y - 3 * r, center.x + 3 * r, center.y + 3 * r
        )):
            raise ValueError(f"B({center}, 3*{r:g}) is not inside the target window")

    c = center.as_array()
    xs = a.grid.centers()
    tree = KDTree(a.images.reshape(-1, 2))
    norms = op_norm(a.jac).ravel() ** p
    area = a.grid.cell_area
    probe = KeyEstimateProbe(center=center, radii=list(radii), p=p)
    any_hit = False
    for r in radii:
        hits = np.asarray(tree.query_ball_point(c, r), dtype=np.int64)
        hits2 = np.asarray(tree.query_ball_point(c, 2 * r), dtype=np.int64)
        diam = diameter(xs[np.sort(hits)]) if len(hits) else 0.0
        measure = len(hits2) * area
        energy = parallel.ordered_sum(norms[np.sort(hits2)]) * area if len(hits2) else 0.0
        phi = _phi_integral(fmap, a, inv, c, 2 * r, p)
        denom = (1.0 / r) * measure ** ((p - 1) / p) * energy ** (1 / p)
        ratio = diam / denom if denom > 0 else 0.0
        any_hit = any_hit or len(hits) > 0
        probe.lhs_diam.append(diam)
        probe.measure_2r.append(measure)
        probe.energy_2r.append(energy)
        probe.phi_2r.append(phi)
        probe.ratio.append(ratio)
        logger.debug(
            "Key estimate r=%g: diam=%.4g measure=%.4g energy=%.4g phi=%.4g ratio=%.4g",
            r, diam, measure, energy, phi, ratio,
        )
    if not any_hit:
        raise NoPreimage(f"No source sample maps into B({center}, r) for any r", probe)
    return probe


def good_energy_2r(
    analysis: MapAnalysis, center: Point2, r: float, p: float
) -> float:
    """Integral of |Df|^p over f^-1(B(center, 2r)) intersected with the good set."""
    imgs = analysis.images.reshape(-1, 2)
    inside = (np.hypot(*(imgs - center.as_array()).T) <= 2 * r) & analysis.good.ravel()
    norms = op_norm(analysis.jac).ravel() ** p
    return parallel.ordered_sum(norms[inside]) * analysis.grid.cell_area


# --- oscillation ---


@dataclass
class OscillationProbe:
    """osc(h, B_r) / (r^(1-2/p) ||Dh||_Lp(B_r)) per radius."""

    center: Point2
    radii: list[float]
    p: float
    osc: list[float] = field(default_factory=list)
    norm: list[float] = field(default_factory=list)
    ratio: list[float] = field(default_factory=list)


def oscillation_probe(
    inv: InverseMap, center: Point2, radii: Sequence[float], p: float
) -> OscillationProbe:
    if p <= 2:
        raise ValueError(f"The oscillation estimate needs p > 2, got {p}")
    jac, valid = inverse_jacobian(inv)
    dens = (op_norm(jac) ** p).ravel()
    ok = (valid & inv.defined).ravel()
    ys = inv.grid.centers()
    vals = inv.values.reshape(-1, 2)
    dist = np.hypot(*(ys - center.as_array()).T)
    out = OscillationProbe(center=center, radii=list(radii), p=p)
    for r in radii:
        inside = ok & (dist <= r)
        osc = diameter(vals[inside]) if inside.any() else 0.0
        norm = (parallel.ordered_sum(dens[inside]) * inv.grid.cell_area) ** (1 / p)
        denom = r ** (1 - 2 / p) * norm
        out.osc.append(osc)
        out.norm.append(norm)
        out.ratio.append(osc / denom if denom > 0 else 0.0)
    return out
