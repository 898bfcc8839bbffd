# Copyright 2026 Harald Schilly <info@arjoma.at>, ARJOMA FlexCo.
# SPDX-License-Identifier: Apache-2.0

"""Sampled (INV) checks and the structural checks on topological images."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from invmap import parallel
from invmap.degree import DegreeRaster, TopImage, crossing_degree, topological_image
from invmap.errors import EmptyWindow
from invmap.geometry import Ball, BoolArray, FloatArray, Grid, Point2, rect_lattice
from invmap.inverse import InverseMap, resample_inverse
from invmap.maps import PlanarMap

logger = logging.getLogger("invmap")

N_SAMPLES_DEFAULT = 4096
EPS_INV_DEFAULT = 0.005
WITNESS_CAP = 100


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Witness:
    """A sample (or pixel) that breaks a condition."""

    point: Point2
    image: Point2 | None
    classification: str

    def __str__(self) -> str:
        if self.image is None:
            return f"{self.classification} at {self.point}"
        return f"{self.classification}: {self.point} -> {self.image}"


@dataclass
class InvReport:
    """Outcome of the sampled (INV) check for one ball."""

    ball: Ball
    n_inside: int
    n_outside: int
    viol_inside: int  # samples of the closed ball mapped outside E(f, B)
    viol_outside: int  # samples outside the ball mapped into im_T(f, B)
    witnesses: list[Witness] = field(default_factory=list)

    @property
    def viol_frac(self) -> float:
        total = self.n_inside + self.n_outside
        return (self.viol_inside + self.viol_outside) / total if total else 0.0

    def ok(self, eps_inv: float = EPS_INV_DEFAULT) -> bool:
        return self.viol_frac <= eps_inv


@dataclass
class StructReport:
    """Tri-state outcome of nested / disjoint / degree-range checks.

    A check that was not run stays None.
    """

    nested_ok: Verdict | None = None
    disjoint_ok: Verdict | None = None
    degree_range_ok: Verdict | None = None
    details: dict[str, int] = field(default_factory=dict)
    witnesses: list[Witness] = field(default_factory=list)
    label: str = ""

    @property
    def verdict(self) -> Verdict:
        """Worst verdict among the checks that ran."""
        ran = [v for v in (self.nested_ok, self.disjoint_ok, self.degree_range_ok) if v]
        if Verdict.FAIL in ran:
            return Verdict.FAIL
        if Verdict.INCONCLUSIVE in ran:
            return Verdict.INCONCLUSIVE
        return Verdict.PASS


def _pixel_witnesses(raster: DegreeRaster, mask: BoolArray, kind: str) -> list[Witness]:
    rows, cols = np.nonzero(mask)
    xs, ys = raster.grid.xs(), raster.grid.ys()
    return [
        Witness(Point2(float(xs[c]), float(ys[r])), None, kind)
        for r, c in zip(rows[:WITNESS_CAP], cols[:WITNESS_CAP])
    ]


# --- (INV) per ball ---


def outside_window_samples(fmap: PlanarMap, ball: Ball, top: TopImage, n: int) -> FloatArray:
    """Lattice over bbox(ball u raster window) grown by one radius, minus the closed ball."""
    window = ball.bbox.union(top.raster.window).grow(ball.radius).intersect(fmap.domain)
    share = max(window.area - ball.area, 1e-300) / window.area
    pts = rect_lattice(window, max(1, round(n / share)))
    return pts[~ball.contains(pts)]  # type: ignore[no-any-return]


def check_inv_ball(
    fmap: PlanarMap,
    ball: Ball,
    grid: Grid,
    n_samples: int = N_SAMPLES_DEFAULT,
    tol: float | None = None,
    w_mask: float | None = None,
) -> InvReport:
    """Check both halves of (INV) on stratified lattices inside and outside ``ball``.

    A sample passes when its image has the right degree with respect to the
    loop f(dB) or lies within ``tol`` of the loop (default: the raster mask
    width).
    """
    top = topological_image(fmap, ball, grid, w_mask=w_mask)
    if top.loop.degenerate:
        raise EmptyWindow(f"Image of the boundary of {ball} under {fmap.label} is a point")
    tol = top.raster.w_mask if tol is None else tol
    step = 0.25 * min(top.raster.grid.dx, top.raster.grid.dy)

    inside = ball.lattice(n_samples)
    outside = outside_window_samples(fmap, ball, top, n_samples)
    pts = np.vstack([inside, outside])
    images = fmap.evaluate_many(pts)
    deg = crossing_degree(top.loop, images)
    near = top.loop.distance(images, step) <= tol

    n_in = len(inside)
    bad_in = ~near[:n_in] & (deg[:n_in] == 0)
    bad_out = ~near[n_in:] & (deg[n_in:] != 0)

    witnesses: list[Witness] = []
    for offset, bad, kind in ((0, bad_in, "inside-not-in-E"), (n_in, bad_out, "outside-in-imT")):
        for k in np.nonzero(bad)[0][: WITNESS_CAP - len(witnesses)]:
            witnesses.append(
                Witness(Point2.of(pts[offset + k]), Point2.of(images[offset + k]), kind)
            )

    report = InvReport(
        ball=ball,
        n_inside=n_in,
        n_outside=len(outside),
        viol_inside=int(np.count_nonzero(bad_in)),
        viol_outside=int(np.count_nonzero(bad_out)),
        witnesses=witnesses,
    )
    logger.debug(
        "INV %s: %d/%d inside, %d/%d outside violations (%.4f)",
        ball, report.viol_inside, report.n_inside, report.viol_outside, report.n_outside,
        report.viol_frac,
    )
    return report


def check_inv_schedule(
    fmap: PlanarMap,
    balls: Sequence[Ball],
    grid: Grid,
    n_samples: int = N_SAMPLES_DEFAULT,
    w_mask: float | None = None,
) -> list[InvReport]:
    """check_inv_ball for every ball; reports in ball order."""
    return parallel.map_items(
        lambda b: check_inv_ball(fmap, b, grid, n_samples=n_samples, w_mask=w_mask), balls
    )


# --- structural checks ---


def check_nested(
    fmap: PlanarMap,
    inner: Ball,
    outer: Ball,
    grid: Grid,
    w_mask: float | None = None,
) -> StructReport:
    """E(f, inner) must lie inside E(f, outer) away from both masks."""
    if not outer.contains_ball(inner):
        raise ValueError(f"{inner} is not contained in {outer}")
    ti = topological_image(fmap, inner, grid, w_mask=w_mask)
    to = topological_image(fmap, outer, grid, w_mask=w_mask)
    ri, ro = ti.raster, to.raster

    # pixels of the inner raster that are outside the outer window have degree 0 there
    e_outer = np.zeros(ri.grid.shape, dtype=bool)
    mine, theirs = ri.lattice_slices(ro)
    e_outer[mine] = ro.e_set[theirs]

    strong = ri.imt & ~e_outer
    weak = ri.near & ~e_outer
    if strong.any():
        verdict = Verdict.FAIL
    elif weak.any():
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.PASS
    report = StructReport(
        nested_ok=verdict,
        details={
            "inner_imt_pixels": int(np.count_nonzero(ri.imt)),
            "outer_e_pixels": int(np.count_nonzero(ro.e_set)),
            "strong_pixels": int(np.count_nonzero(strong)),
            "masked_pixels": int(np.count_nonzero(weak)),
        },
        witnesses=_pixel_witnesses(ri, strong, "E(inner) outside E(outer)"),
        label=f"nested {inner} in {outer}",
    )
    logger.debug("%s: %s %s", report.label, verdict.value, report.details)
    return report


def check_disjoint(
    fmap: PlanarMap,
    b1: Ball,
    b2: Ball,
    grid: Grid,
    w_mask: float | None = None,
) -> StructReport:
    """The topological images of disjoint balls must not overlap."""
    if not b1.interiors_disjoint(b2):
        raise ValueError(f"{b1} and {b2} overlap")
    if not b1.disjoint_from(b2):
        logger.warning("Closures of %s and %s touch; checking interiors only", b1, b2)
    r1 = topological_image(fmap, b1, grid, w_mask=w_mask).raster
    r2 = topological_image(fmap, b2, grid, w_mask=w_mask).raster

    overlap = np.zeros(r1.grid.shape, dtype=bool)
    touch = np.zeros(r1.grid.shape, dtype=bool)
    mine, theirs = r1.lattice_slices(r2)
    overlap[mine] = r1.imt[mine] & r2.imt[theirs]
    touch[mine] = (r1.imt[mine] & r2.near[theirs]) | (r1.near[mine] & r2.imt[theirs])

    if overlap.any():
        verdict = Verdict.FAIL
    elif touch.any():
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.PASS
    report = StructReport(
        disjoint_ok=verdict,
        details={
            "overlap_pixels": int(np.count_nonzero(overlap)),
            "masked_pixels": int(np.count_nonzero(touch)),
        },
        witnesses=_pixel_witnesses(r1, overlap, "im_T overlap"),
        label=f"disjoint {b1}, {b2}",
    )
    logger.debug("%s: %s %s", report.label, verdict.value, report.details)
    return report


def check_degree_range(
    fmap: PlanarMap,
    balls: Sequence[Ball],
    grid: Grid,
    w_mask: float | None = None,
) -> StructReport:
    """Every classified pixel of every ball must have degree 0 or 1."""
    witnesses: list[Witness] = []
    details: dict[str, int] = {"balls": len(balls), "bad_pixels": 0, "classified_pixels": 0}
    tops = parallel.map_items(lambda b: topological_image(fmap, b, grid, w_mask=w_mask), balls)
    for ball, top in zip(balls, tops):
        r = top.raster
        bad = ~r.near & (r.deg != 0) & (r.deg != 1)
        n_bad = int(np.count_nonzero(bad))
        details["bad_pixels"] += n_bad
        details["classified_pixels"] += int(np.count_nonzero(~r.near))
        if n_bad:
            degs = sorted({int(d) for d in np.unique(r.deg[bad])})
            logger.debug("Degree range %s: %d pixel(s) with degree %s", ball, n_bad, degs)
            for w in _pixel_witnesses(r, bad, f"degree {degs} on {ball}"):
                if len(witnesses) < WITNESS_CAP:
                    witnesses.append(w)
    verdict = Verdict.FAIL if details["bad_pixels"] else Verdict.PASS
    return StructReport(
        degree_range_ok=verdict,
        details=details,
        witnesses=witnesses,
        label=f"degree range over {len(balls)} ball(s)",
    )


def check_inverse_inv(
    inv: InverseMap,
    balls: Sequence[Ball],
    grid: Grid,
    n_samples: int = N_SAMPLES_DEFAULT,
) -> list[InvReport]:
    """(INV) for the generalized inverse itself, resampled as a grid map."""
    h = resample_inverse(inv)
    window = inv.grid.domain
    usable = [b for b in balls if window.contains_rect(b.bbox)]
    if len(usable) < len(balls):
        logger.warning("%d ball(s) outside the inverse window skipped", len(balls) - len(usable))
    return check_inv_schedule(h, usable, grid, n_samples=n_samples)
