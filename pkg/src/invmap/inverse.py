# Copyright 2026 Harald Schilly <info@arjoma.at>, ARJOMA FlexCo.
# SPDX-License-Identifier: Apache-2.0

"""Generalized inverse h: cavities, graph inversion and candidate averaging.

``build_inverse`` fills a target grid in this order:

1. cells inside a detected cavity image take the cavity point;
2. every other cell inside the image region gathers good source samples whose
   image lies within rho of the cell center, doubling rho until enough are
   found, and averages their first-order corrected preimages;
3. cells whose candidates split into far-apart clusters are resolved last, in
   row-major order, by the cluster closest to the already assigned neighbours.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import KDTree

from invmap import parallel
from invmap.analysis import MapAnalysis, analyze, det2, inv2, op_norm
from invmap.degree import (
    DegreeRaster,
    crossing_degree,
    degree_raster,
    trace_boundary,
    trace_rect,
)
from invmap.geometry import (
    Ball,
    BoolArray,
    FloatArray,
    Grid,
    IntArray,
    Point2,
    Rect,
    radius_schedule,
)
from invmap.maps import GridSampled, PlanarMap

logger = logging.getLogger("invmap")

M_MIN = 3
RHO_DOUBLINGS = 5  # rho_max = 32 rho0
RHO0_FACTOR = 1.5
BIMODAL_CELLS = 8
CAVITY_RADIUS_CELLS = 8
DELTA_CAV_PIXELS = 10
KAPPA_JUMP_DEFAULT = 10.0
EPS_UNDEF = 0.01
MAX_CORRECTION_DIAGS = 4.0


class Provenance(IntEnum):
    CAVITY = 0
    GRAPH = 1
    AVERAGED = 2
    UNDEFINED = 3


@dataclass(frozen=True, eq=False)
class Cavity:
    """A source point whose topological image has positive area."""

    source: Point2
    region: DegreeRaster  # im_T at the smallest detection radius
    area: float
    areas: tuple[float, ...] = ()  # im_T area per radius, largest radius first

    def covers(self, points: FloatArray) -> BoolArray:
        deg, near, inside = self.region.lookup(points)
        return inside & ~near & (deg != 0)  # type: ignore[no-any-return]

    def shrinks(self, rel_tol: float = 0.01) -> bool:
        """True if the area does not grow along the decreasing radii."""
        slack = rel_tol * max(self.areas, default=0.0) + 4.0 * self.region.pixel_area
        return all(b <= a + slack for a, b in zip(self.areas, self.areas[1:]))


@dataclass(frozen=True, eq=False)
class InverseMap:
    """h sampled at target cell centers with a provenance tag per cell."""

    grid: Grid
    values: FloatArray  # (ny, nx, 2), NaN where undefined
    provenance: IntArray  # (ny, nx), Provenance codes
    cavities: tuple[Cavity, ...] = ()
    region: BoolArray | None = None  # cells inside the image of the domain
    source: MapAnalysis | None = field(default=None, repr=False)

    @classmethod
    def from_values(cls, grid: Grid, values: FloatArray) -> InverseMap:
        """Wrap given per-cell values; finite cells count as graph cells."""
        v = np.asarray(values, dtype=np.float64).reshape(grid.ny, grid.nx, 2)
        defined = np.all(np.isfinite(v), axis=-1)
        prov = np.where(defined, Provenance.GRAPH, Provenance.UNDEFINED).astype(np.int64)
        return cls(grid=grid, values=v, provenance=prov)

    @property
    def defined(self) -> BoolArray:
        return self.provenance != Provenance.UNDEFINED  # type: ignore[no-any-return]

    @property
    def within(self) -> BoolArray:
        if self.region is None:
            return np.ones(self.grid.shape, dtype=bool)
        return self.region

    @property
    def undefined_fraction(self) -> float:
        """Undefined share of the cells inside the image region."""
        inside = self.within
        n = int(np.count_nonzero(inside))
        return float(np.count_nonzero(~self.defined & inside)) / n if n else 0.0

    def counts(self) -> dict[str, int]:
        return {p.name.lower(): int(np.count_nonzero(self.provenance == p)) for p in Provenance}


# --- cavities ---


def _loop_length(samples: FloatArray) -> float:
    return float(np.sum(np.hypot(*np.diff(samples, axis=0).T)))


def _cavity_area(
    fmap: PlanarMap, ball: Ball, pixel_grid: Grid, w_mask: float, delta_cav: float
) -> tuple[float, DegreeRaster | None]:
    h_loop = 0.5 * min(pixel_grid.dx, pixel_grid.dy)
    loop = trace_boundary(fmap, ball, h_loop)
    length = _loop_length(loop.samples)
    if length * length / (4.0 * math.pi) < delta_cav:
        return 0.0, None  # isoperimetric bound: the loop cannot enclose delta_cav
    raster = degree_raster(loop, pixel_grid, w_mask)
    return float(np.count_nonzero(raster.imt)) * raster.pixel_area, raster


def cavity_candidates(analysis: MapAnalysis) -> FloatArray:
    """Source cell centers with a non-good cell in their 3x3 neighbourhood."""
    near_bad = ndimage.binary_dilation(~analysis.good, structure=np.ones((3, 3), dtype=bool))
    return analysis.grid.centers()[near_bad.ravel()]  # type: ignore[no-any-return]


def detect_cavities(
    fmap: PlanarMap,
    analysis: MapAnalysis,
    pixel_grid: Grid,
    radii: list[float] | None = None,
    delta_cav: float | None = None,
    w_mask: float | None = None,
) -> list[Cavity]:
    """Find cavity points among the cavity candidates of ``analysis``.

    Rasters use the lattice of ``pixel_grid`` with a mask of half a pixel
    diagonal unless ``w_mask`` is given. A candidate is a cavity when im_T of
    the smallest ball around it still covers ``delta_cav`` (default: ten
    pixel areas). Cavities closer than one source cell diagonal merge into
    their centroid.
    """
    g = analysis.grid
    sched = sorted(radii or radius_schedule(CAVITY_RADIUS_CELLS * max(g.dx, g.dy)), reverse=True)
    delta = DELTA_CAV_PIXELS * pixel_grid.cell_area if delta_cav is None else delta_cav
    w = 0.5 * pixel_grid.cell_diag if w_mask is None else w_mask
    r_min = sched[-1]
    cands = cavity_candidates(analysis)
    inside = [
        c for c in cands
        if fmap.domain.contains_rect(Ball(Point2.of(c), r_min).bbox, tol=fmap.tau_dom)
    ]
    logger.debug("Cavity search: %d candidate(s), delta_cav=%.3g", len(inside), delta)

    def probe(c: FloatArray) -> float:
        area, _ = _cavity_area(fmap, Ball(Point2.of(c), r_min), pixel_grid, w, delta)
        return area

    areas = parallel.map_items(probe, inside)
    hits = np.array([c for c, a in zip(inside, areas) if a >= delta])
    if len(hits) == 0:
        return []

    pairs = KDTree(hits).query_pairs(g.cell_diag * (1 + 1e-9), output_type="ndarray")
    graph = coo_matrix(
        (np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(len(hits), len(hits))
    )
    n_comp, labels = connected_components(graph, directed=False)

    cavities: list[Cavity] = []
    for k in range(n_comp):
        members = hits[labels == k]
        center = Point2.of(members.mean(axis=0))
        per_radius: list[float] = []
        region: DegreeRaster | None = None
        for r in sched:
            ball = Ball(center, r)
            if not fmap.domain.contains_rect(ball.bbox, tol=fmap.tau_dom):
                continue
            area, region = _cavity_area(fmap, ball, pixel_grid, w, 0.0)
            per_radius.append(area)
        if region is None or not per_radius or per_radius[-1] < delta:
            # the centroid itself failed; fall back to the member closest to it
            d = np.hypot(*(members - center.as_array()).T)
            center = Point2.of(members[int(np.argmin(d))])
            area, region = _cavity_area(fmap, Ball(center, r_min), pixel_grid, w, 0.0)
            per_radius = [area]
        assert region is not None
        cavities.append(Cavity(center, region, per_radius[-1], tuple(per_radius)))
        logger.info("Cavity at %s, area %.6g", center, per_radius[-1])
        if not cavities[-1].shrinks():
            logger.warning("Cavity at %s: im_T area grows as the radius shrinks: %s", center,
                           ", ".join(f"{a:.4g}" for a in per_radius))
    cavities.sort(key=lambda c: (c.source.y, c.source.x))
    return cavities


# --- inverse construction ---


def image_region(fmap: PlanarMap, analysis: MapAnalysis, target_grid: Grid) -> BoolArray:
    """Target cells inside the image: nonzero degree of f(dOmega) or hit by a sample."""
    h_loop = 0.5 * min(target_grid.dx, target_grid.dy)
    loop = trace_rect(fmap, analysis.grid.domain, h_loop)
    deg = crossing_degree(loop, target_grid.centers()).reshape(target_grid.shape)
    i, j, inside = target_grid.cell_of(analysis.images.reshape(-1, 2))
    hit = np.zeros(target_grid.shape, dtype=bool)
    hit[j[inside], i[inside]] = True
    return (deg != 0) | hit  # type: ignore[no-any-return]


def default_target_grid(fmap: PlanarMap, analysis: MapAnalysis, nx: int, ny: int) -> Grid:
    """Grid over the bounding box of f(dOmega) and of the sampled images."""
    g = analysis.grid
    loop = trace_rect(fmap, g.domain, 0.5 * min(g.dx, g.dy))
    pts = np.vstack([loop.samples, analysis.images.reshape(-1, 2)])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-9 * max(1.0, float(np.max(np.abs(pts)))))
    return Grid(Rect.of(lo[0], lo[1], lo[0] + span[0], lo[1] + span[1]), nx, ny)


def default_rho0(analysis: MapAnalysis) -> float:
    """1.5 x the median image size of a good source cell."""
    g = analysis.grid
    norms = op_norm(analysis.jac[analysis.good])
    if norms.size == 0:
        return RHO0_FACTOR * max(g.dx, g.dy)
    return RHO0_FACTOR * float(np.median(norms)) * max(g.dx, g.dy)


def _split_clusters(points: FloatArray, link: float) -> list[FloatArray]:
    pairs = KDTree(points).query_pairs(link, output_type="ndarray")
    graph = coo_matrix(
        (np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(len(points), len(points))
    )
    n, labels = connected_components(graph, directed=False)
    return [points[labels == k] for k in range(n)]


def build_inverse(
    fmap: PlanarMap,
    analysis: MapAnalysis,
    target_grid: Grid,
    cavities: list[Cavity] | None = None,
    rho0: float | None = None,
    m_min: int = M_MIN,
    delta_cav: float | None = None,
) -> InverseMap:
    """Sample the generalized inverse of ``fmap`` on ``target_grid``."""
    g = analysis.grid
    if cavities is None:
        cavities = detect_cavities(fmap, analysis, target_grid, delta_cav=delta_cav)
    rho = default_rho0(analysis) if rho0 is None else rho0
    if rho <= 0:
        raise ValueError(f"rho0 must be positive, got {rho}")

    ys = target_grid.centers()
    n = len(ys)
    values = np.full((n, 2), np.nan)
    prov = np.full(n, Provenance.UNDEFINED, dtype=np.int64)
    region = image_region(fmap, analysis, target_grid).ravel()

    # (a) cavity images
    for cav in cavities:
        take = cav.covers(ys) & (prov == Provenance.UNDEFINED)
        values[take] = cav.source.as_array()
        prov[take] = Provenance.CAVITY

    # (b) graph inversion on the good set
    good = analysis.good.ravel()
    xs = g.centers()[good]
    fx = analysis.images.reshape(-1, 2)[good]
    dinv = inv2(analysis.jac.reshape(-1, 2, 2)[good])
    todo = np.nonzero(region & (prov == Provenance.UNDEFINED))[0]
    bimodal: dict[int, list[FloatArray]] = {}
    link = BIMODAL_CELLS * max(g.dx, g.dy)
    max_step = MAX_CORRECTION_DIAGS * g.cell_diag
    lo = np.array([g.domain.min.x, g.domain.min.y])
    hi = np.array([g.domain.max.x, g.domain.max.y])

    if len(xs) and len(todo):
        tree = KDTree(fx)
        for level in range(RHO_DOUBLINGS + 1):
            if len(todo) == 0:
                break
            r = rho * 2.0**level
            last = level == RHO_DOUBLINGS
            found = tree.query_ball_point(ys[todo], r, return_sorted=True)
            sizes = np.array([len(f) for f in found], dtype=np.int64)
            ready = sizes >= (1 if last else m_min)
            cells = todo[ready]
            if len(cells):
                idx = np.concatenate([np.asarray(f, dtype=np.int64) for f in found[ready]])
                owner = np.repeat(cells, sizes[ready])
                step = np.einsum("nij,nj->ni", dinv[idx], ys[owner] - fx[idx])
                size = np.hypot(step[:, 0], step[:, 1])
                scale = np.where(size > max_step, max_step / np.where(size > 0, size, 1.0), 1.0)
                pre = np.clip(xs[idx] + step * scale[:, None], lo, hi)
                starts = np.concatenate([[0], np.cumsum(sizes[ready])[:-1]])
                span = np.maximum.reduceat(pre, starts) - np.minimum.reduceat(pre, starts)
                tag = Provenance.GRAPH if level == 0 else Provenance.AVERAGED
                for c, s0, cnt, sp in zip(cells, starts, sizes[ready], span):
                    block = pre[s0 : s0 + cnt]
                    if math.hypot(sp[0], sp[1]) > link:
                        parts = _split_clusters(block, link)
                        if len(parts) > 1:
                            bimodal[int(c)] = parts
                            prov[c] = tag
                            continue
                    values[c] = block.mean(axis=0)
                    prov[c] = tag
            todo = todo[~ready]

    # (c) bimodal cells in row-major order
    if bimodal:
        vgrid = values.reshape(target_grid.ny, target_grid.nx, 2)
        for c in sorted(bimodal):
            j, i = divmod(c, target_grid.nx)
            nb = vgrid[max(j - 1, 0) : j + 2, max(i - 1, 0) : i + 2].reshape(-1, 2)
            nb = nb[np.all(np.isfinite(nb), axis=1)]
            means = [p.mean(axis=0) for p in bimodal[c]]
            if len(nb):
                target = nb.mean(axis=0)
                best = min(range(len(means)), key=lambda k: (
                    float(np.hypot(*(means[k] - target))), means[k][0], means[k][1]
                ))
            else:
                best = min(range(len(means)), key=lambda k: (means[k][0], means[k][1]))
            values[c] = means[best]
        logger.debug("Resolved %d bimodal cell(s)", len(bimodal))

    inv = InverseMap(
        grid=target_grid,
        values=values.reshape(target_grid.ny, target_grid.nx, 2),
        provenance=prov.reshape(target_grid.shape),
        cavities=tuple(cavities),
        region=region.reshape(target_grid.shape),
        source=analysis,
    )
    frac = inv.undefined_fraction
    if frac > EPS_UNDEF:
        logger.warning(
            "Inverse of %s undefined on %.2f%% of the image region", fmap.label, 100 * frac
        )
    logger.debug("Inverse of %s: %s", fmap.label, inv.counts())
    return inv


def roundtrip_residual(fmap: PlanarMap, inv: InverseMap) -> float:
    """max |f(h(y)) - y| over graph cells."""
    mask = inv.provenance == Provenance.GRAPH
    if not mask.any():
        return 0.0
    ys = inv.grid.centers().reshape(inv.grid.ny, inv.grid.nx, 2)[mask]
    fy = fmap.evaluate_many(inv.values[mask])
    return float(np.max(np.hypot(*(fy - ys).T)))


# --- multiplicity ---


@dataclass(frozen=True, eq=False)
class MultiplicityRaster:
    grid: Grid
    counts: IntArray  # (ny, nx)


def _cluster_labels(keys: IntArray, shape: tuple[int, int]) -> IntArray:
    """Components of the 8-neighbour source graph restricted to equal keys (-1 = skip)."""
    ny, nx = shape
    k = keys.reshape(ny, nx)
    ids = np.arange(ny * nx).reshape(ny, nx)
    rows: list[IntArray] = []
    cols: list[IntArray] = []
    for a, b in (
        ((slice(None), slice(0, -1)), (slice(None), slice(1, None))),
        ((slice(0, -1), slice(None)), (slice(1, None), slice(None))),
        ((slice(0, -1), slice(0, -1)), (slice(1, None), slice(1, None))),
        ((slice(0, -1), slice(1, None)), (slice(1, None), slice(0, -1))),
    ):
        same = (k[a] == k[b]) & (k[a] >= 0)
        rows.append(ids[a][same])
        cols.append(ids[b][same])
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    graph = coo_matrix((np.ones(len(r)), (r, c)), shape=(ny * nx, ny * nx))
    _, labels = connected_components(graph, directed=False)
    return labels  # type: ignore[no-any-return]


def _multiplicity(
    analysis: MapAnalysis, target_grid: Grid, good_only: bool = False
) -> IntArray:
    g = analysis.grid
    i, j, inside = target_grid.cell_of(analysis.images.reshape(-1, 2))
    cell = j * target_grid.nx + i
    good = analysis.good.ravel()
    keys = np.where(inside, 2 * cell + good.astype(np.int64), -1)
    if good_only:
        keys = np.where(good, keys, -1)
    labels = _cluster_labels(keys, g.shape)
    use = keys >= 0
    pairs = np.unique(np.column_stack([cell[use], labels[use]]), axis=0)
    counts = np.bincount(pairs[:, 0], minlength=target_grid.size) if len(pairs) else np.zeros(
        target_grid.size, dtype=np.int64
    )
    return counts.reshape(target_grid.shape).astype(np.int64)  # type: ignore[no-any-return]


def multiplicity_raster(
    fmap: PlanarMap,
    source_grid: Grid,
    target_grid: Grid,
    analysis: MapAnalysis | None = None,
) -> MultiplicityRaster:
    """Number of separate source clusters landing in each target cell."""
    a = analysis if analysis is not None else analyze(fmap, source_grid)
    if a.grid != source_grid:
        raise ValueError("analysis was computed on a different source grid")
    return MultiplicityRaster(target_grid, _multiplicity(a, target_grid))


# --- jumps and derivative checks ---


@dataclass(frozen=True)
class Jump:
    """Two adjacent target cells (row, column) whose h values differ a lot."""

    cell_a: tuple[int, int]
    cell_b: tuple[int, int]
    magnitude: float


def jump_pairs(inv: InverseMap, kappa_jump: float = KAPPA_JUMP_DEFAULT) -> tuple[
    BoolArray, BoolArray
]:
    """Horizontal and vertical jump flags, shapes (ny, nx-1) and (ny-1, nx)."""
    v = inv.values
    dh = np.hypot(*np.moveaxis(v[:, 1:] - v[:, :-1], -1, 0))
    dv = np.hypot(*np.moveaxis(v[1:] - v[:-1], -1, 0))
    with np.errstate(invalid="ignore"):
        jh = np.nan_to_num(dh, nan=0.0) > kappa_jump * inv.grid.dx
        jv = np.nan_to_num(dv, nan=0.0) > kappa_jump * inv.grid.dy
    return jh, jv


def detect_jump(inv: InverseMap, kappa_jump: float = KAPPA_JUMP_DEFAULT) -> list[Jump]:
    """Adjacent cell pairs with |h(a) - h(b)| > kappa_jump x cell width, row-major."""
    jh, jv = jump_pairs(inv, kappa_jump)
    v = inv.values
    out: list[Jump] = []
    for j, i in zip(*np.nonzero(jh)):
        mag = float(np.hypot(*(v[j, i + 1] - v[j, i])))
        out.append(Jump((int(j), int(i)), (int(j), int(i) + 1), mag))
    for j, i in zip(*np.nonzero(jv)):
        mag = float(np.hypot(*(v[j + 1, i] - v[j, i])))
        out.append(Jump((int(j), int(i)), (int(j) + 1, int(i)), mag))
    out.sort(key=lambda jp: (jp.cell_a, jp.cell_b))
    return out


def jump_adjacent(inv: InverseMap, kappa_jump: float = KAPPA_JUMP_DEFAULT) -> BoolArray:
    """Cells touching a jump pair."""
    jh, jv = jump_pairs(inv, kappa_jump)
    mask = np.zeros(inv.grid.shape, dtype=bool)
    mask[:, :-1] |= jh
    mask[:, 1:] |= jh
    mask[:-1, :] |= jv
    mask[1:, :] |= jv
    return mask


def inverse_jacobian(inv: InverseMap) -> tuple[FloatArray, BoolArray]:
    """Finite-difference Dh per cell and the cells where it exists.

    Central differences where both neighbours are defined, one-sided where
    only one is. Differences never cross the rim of a cavity, and Dh is zero
    on cavity cells.
    """
    v = inv.values
    ok = np.all(np.isfinite(v), axis=-1)
    cav = inv.provenance == Provenance.CAVITY
    grads = []
    valid = ok.copy()
    for axis, step in ((1, inv.grid.dx), (0, inv.grid.dy)):
        fwd = np.full_like(v, np.nan)
        bwd = np.full_like(v, np.nan)
        sl_hi = [slice(None)] * 2
        sl_lo = [slice(None)] * 2
        sl_hi[axis] = slice(1, None)
        sl_lo[axis] = slice(0, -1)
        diff = (v[tuple(sl_hi)] - v[tuple(sl_lo)]) / step
        diff[cav[tuple(sl_hi)] != cav[tuple(sl_lo)]] = np.nan
        fwd[tuple(sl_lo)] = diff
        bwd[tuple(sl_hi)] = diff
        f_ok = np.all(np.isfinite(fwd), axis=-1)
        b_ok = np.all(np.isfinite(bwd), axis=-1)
        grad = np.where(
            (f_ok & b_ok)[..., None],
            0.5 * (np.nan_to_num(fwd) + np.nan_to_num(bwd)),
            np.where(f_ok[..., None], np.nan_to_num(fwd), np.nan_to_num(bwd)),
        )
        valid &= f_ok | b_ok
        grads.append(grad)
    jac = np.stack(grads, axis=-1)  # jac[..., i, k] = d h_i / d y_k
    jac[cav] = 0.0
    valid |= cav
    return jac, valid


def resample_inverse(inv: InverseMap, name: str = "h") -> GridSampled:
    """h as a GridSampled map; undefined cells copy the nearest defined cell."""
    v = inv.values.reshape(-1, 2).copy()
    ok = np.all(np.isfinite(v), axis=1)
    if not ok.any():
        raise ValueError("Inverse is undefined everywhere")
    if not ok.all():
        centers = inv.grid.centers()
        _, near = KDTree(centers[ok]).query(centers[~ok])
        v[~ok] = v[ok][near]
    return GridSampled(inv.grid, v.reshape(inv.grid.ny, inv.grid.nx, 2), name=name)


def _source_jacobian(fmap: PlanarMap, analysis: MapAnalysis, pts: FloatArray) -> FloatArray:
    jac = fmap.jacobian_many(pts)
    if jac is not None:
        return jac
    i, j, _ = analysis.grid.cell_of(pts)
    return analysis.jac[j, i]  # type: ignore[no-any-return]


def inverse_derivative_check(
    fmap: PlanarMap, analysis: MapAnalysis, inv: InverseMap
) -> tuple[float, int]:
    """Largest relative error of Dh against (Df o h)^-1 and of J_h against 1/(J_f o h).

    Only graph cells whose whole 3x3 neighbourhood is graph are compared.
    """
    graph = inv.provenance == Provenance.GRAPH
    interior = ndimage.binary_erosion(graph, structure=np.ones((3, 3), dtype=bool))
    if not interior.any():
        return 0.0, 0
    dh, _ = inverse_jacobian(inv)
    dh = dh[interior]
    df = _source_jacobian(fmap, analysis, inv.values[interior])
    jf = det2(df)
    ok = np.abs(jf) > analysis.j_min
    if not ok.any():
        return 0.0, 0
    expect = inv2(df[ok])
    err_d = op_norm(dh[ok] - expect) / np.maximum(op_norm(expect), 1e-300)
    err_j = np.abs(det2(dh[ok]) * jf[ok] - 1.0)
    return float(max(err_d.max(), err_j.max())), int(np.count_nonzero(ok))


def change_of_variables_check(
    fmap: PlanarMap, analysis: MapAnalysis, target_grid: Grid
) -> tuple[float, float]:
    """(integral of J_f over the good set, integral of the good-cluster multiplicity)."""
    lhs = parallel.ordered_sum(analysis.jdet[analysis.good]) * analysis.grid.cell_area
    counts = _multiplicity(analysis, target_grid, good_only=True)
    rhs = float(np.sum(counts)) * target_grid.cell_area
    logger.debug("Change of variables for %s: %.6g vs %.6g", fmap.label, lhs, rhs)
    return lhs, rhs
