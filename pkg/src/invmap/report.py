# Copyright 2026 Harald Schilly <info@arjoma.at>, ARJOMA FlexCo.
# SPDX-License-Identifier: Apache-2.0

"""Write reports: CSV tables, PGM rasters and self-contained SVG figures."""

from __future__ import annotations

import csv
import math
import xml.etree.ElementTree as ET
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np

from invmap.degree import DegreeRaster, TopImage
from invmap.energy import EnergyReport, KeyEstimateProbe
from invmap.geometry import FloatArray, Grid, Rect
from invmap.inverse import Cavity, Jump
from invmap.invcheck import InvReport, StructReport, Witness

SVG_NS = "http://www.w3.org/2000/svg"
SVG_SIZE = 512
HEATMAP_MAX_CELLS = 128
PGM_NEAR = 255
PGM_OFFSET = 128

INV_HEADERS = ["check", "ball", "center", "radius", "result", "viol_frac"]

# viridis-like ramp, dark to light
_RAMP = np.array(
    [
        [68, 1, 84],
        [59, 82, 139],
        [33, 145, 140],
        [94, 201, 98],
        [253, 231, 37],
    ],
    dtype=np.float64,
)


def fmt(x: float) -> str:
    """Stable number formatting for CSV cells."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def write_rows(output: str | Path, headers: Sequence[str], rows: Iterable[Sequence[object]]) -> int:
    """Write a CSV file with a header row. Returns the number of data rows."""
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
        writer.writerow(headers)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, float) else v for v in row])
            count += 1
    return count


def write_summary_csv(summary: dict[str, float], label: str, output: str | Path) -> int:
    return write_rows(output, ["map", "key", "value"], ([label, k, v] for k, v in summary.items()))


def write_degree_csv(raster: DegreeRaster, output: str | Path) -> int:
    """One row per pixel: ``px py deg dist``; masked pixels carry ``near``."""
    centers = raster.grid.centers()
    deg = raster.deg.ravel()
    near = raster.near.ravel()
    dist = raster.boundary_dist.ravel()
    rows = (
        [float(x), float(y), "near" if n else int(d), float(b)]
        for (x, y), d, n, b in zip(centers, deg, near, dist)
    )
    return write_rows(output, ["px", "py", "deg", "dist"], rows)


def write_pgm(raster: DegreeRaster, output: str | Path) -> int:
    """Plain PGM (P2): degree + 128, masked pixels 255, top row first."""
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    vals = np.clip(raster.deg + PGM_OFFSET, 0, PGM_NEAR - 1)
    vals = np.where(raster.near, PGM_NEAR, vals)[::-1]
    ny, nx = vals.shape
    with path.open("w", encoding="ascii", newline="\n") as f:
        f.write(f"P2\n# degree + {PGM_OFFSET}, {PGM_NEAR} = near boundary\n")
        f.write(f"{nx} {ny}\n{PGM_NEAR}\n")
        for row in vals:
            f.write(" ".join(str(int(v)) for v in row) + "\n")
    return int(vals.size)


def write_inv_csv(
    inv_reports: Sequence[InvReport],
    struct_reports: Sequence[StructReport],
    eps_inv: float,
    output: str | Path,
) -> int:
    rows: list[list[object]] = []
    for r in inv_reports:
        b = r.ball
        rows.append([
            f"inv-{b.shape.value}",
            str(b),
            f"{b.center.x:g},{b.center.y:g}",
            float(b.radius),
            "pass" if r.ok(eps_inv) else "fail",
            float(r.viol_frac),
        ])
    for s in struct_reports:
        rows.append([s.label, "", "", "", s.verdict.value, ""])
    return write_rows(output, INV_HEADERS, rows)


def write_witnesses_csv(witnesses: Iterable[tuple[str, Witness]], output: str | Path) -> int:
    rows = (
        [
            check,
            w.classification,
            float(w.point.x),
            float(w.point.y),
            float(w.image.x) if w.image else "",
            float(w.image.y) if w.image else "",
        ]
        for check, w in witnesses
    )
    return write_rows(output, ["check", "classification", "x", "y", "fx", "fy"], rows)


def write_cavities_csv(cavities: Sequence[Cavity], output: str | Path) -> int:
    rows = ([float(c.source.x), float(c.source.y), float(c.area)] for c in cavities)
    return write_rows(output, ["cx", "cy", "area"], rows)


def write_jumps_csv(jumps: Sequence[Jump], grid: Grid, output: str | Path) -> int:
    xs, ys = grid.xs(), grid.ys()
    rows = (
        [
            float(0.5 * (xs[j.cell_a[1]] + xs[j.cell_b[1]])),
            float(0.5 * (ys[j.cell_a[0]] + ys[j.cell_b[0]])),
            "x" if j.cell_a[0] == j.cell_b[0] else "y",
            float(j.magnitude),
        ]
        for j in jumps
    )
    return write_rows(output, ["x", "y", "direction", "magnitude"], rows)


def write_energy_csv(reports: Sequence[EnergyReport], label: str, output: str | Path) -> int:
    rows = (
        [
            label,
            r.resolution[0],
            r.resolution[1],
            float(r.lhs),
            float(r.rhs),
            float(r.rel_err),
            r.masked_cells,
            r.jump_cells,
            float(r.jump_energy),
        ]
        for r in reports
    )
    headers = ["map", "nx", "ny", "lhs", "rhs", "rel_err", "masked_cells", "jump_cells",
               "jump_energy"]
    return write_rows(output, headers, rows)


def write_key_estimate_csv(probe: KeyEstimateProbe, output: str | Path) -> int:
    rows = (
        [float(r), float(probe.p), float(d), float(m), float(e), float(phi), float(q)]
        for r, d, m, e, phi, q in zip(
            probe.radii, probe.lhs_diam, probe.measure_2r, probe.energy_2r, probe.phi_2r,
            probe.ratio,
        )
    )
    headers = ["radius", "p", "lhs_diam", "measure_2r", "energy_2r", "phi_2r", "ratio"]
    return write_rows(output, headers, rows)


# --- SVG ---


def _svg_root(view: Rect, title: str) -> tuple[ET.Element, float]:
    scale = SVG_SIZE / max(view.width, view.height)
    w = view.width * scale
    h = view.height * scale
    root = ET.Element(
        "svg",
        {
            "xmlns": SVG_NS,
            "version": "1.1",
            "width": f"{w:.0f}",
            "height": f"{h + 24:.0f}",
            "viewBox": f"0 0 {w:.2f} {h + 24:.2f}",
        },
    )
    ET.SubElement(root, "title").text = title
    text = ET.SubElement(root, "text", {"x": "4", "y": f"{h + 17:.2f}", "font-size": "13"})
    text.text = title
    return root, scale


def _to_px(view: Rect, scale: float, pts: FloatArray) -> FloatArray:
    x = (pts[:, 0] - view.min.x) * scale
    y = (view.max.y - pts[:, 1]) * scale
    return np.column_stack([x, y])


def _color(t: float) -> str:
    t = min(max(t, 0.0), 1.0) * (len(_RAMP) - 1)
    k = min(int(t), len(_RAMP) - 2)
    c = _RAMP[k] + (t - k) * (_RAMP[k + 1] - _RAMP[k])
    return "#{:02x}{:02x}{:02x}".format(*(int(round(v)) for v in c))


def _write_svg(root: ET.Element, output: str | Path) -> None:
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    tree = ET.ElementTree(root)
    ET.indent(tree, space="  ")
    tree.write(path, encoding="utf-8", xml_declaration=True)


def _pool(field: FloatArray, limit: int) -> FloatArray:
    """Block-average a field down to at most ``limit`` cells per side (inf stays inf)."""
    ny, nx = field.shape
    f = max(1, math.ceil(max(ny, nx) / limit))
    if f == 1:
        return field
    my, mx = ny // f, nx // f
    blocks = field[: my * f, : mx * f].reshape(my, f, mx, f)
    return blocks.mean(axis=(1, 3))  # type: ignore[no-any-return]


def write_heatmap_svg(field: FloatArray, grid: Grid, title: str, output: str | Path) -> int:
    """Heatmap of a per-cell field; non-finite cells are drawn black."""
    data = _pool(np.asarray(field, dtype=np.float64), HEATMAP_MAX_CELLS)
    ny, nx = data.shape
    view = grid.domain
    root, scale = _svg_root(view, title)
    finite = data[np.isfinite(data)]
    lo = float(finite.min()) if finite.size else 0.0
    hi = float(finite.max()) if finite.size else 1.0
    span = hi - lo if hi > lo else 1.0
    cw = view.width / nx * scale
    ch = view.height / ny * scale
    g = ET.SubElement(root, "g", {"shape-rendering": "crispEdges"})
    for j in range(ny):
        for i in range(nx):
            v = data[j, i]
            color = _color((v - lo) / span) if math.isfinite(v) else "#000000"
            ET.SubElement(g, "rect", {
                "x": f"{i * cw:.2f}",
                "y": f"{(ny - 1 - j) * ch:.2f}",
                "width": f"{cw + 0.01:.2f}",
                "height": f"{ch + 0.01:.2f}",
                "fill": color,
            })
    ET.SubElement(root, "desc").text = f"range {lo:.6g} .. {hi:.6g}"
    _write_svg(root, output)
    return nx * ny


def write_overlay_svg(
    top: TopImage, title: str, output: str | Path, witnesses: Sequence[Witness] = ()
) -> int:
    """im_T pixels (filled), masked pixels (grey), the loop and optional witnesses."""
    r = top.raster
    view = r.window
    root, scale = _svg_root(view, title)
    cw, ch = r.grid.dx * scale, r.grid.dy * scale
    ny = r.grid.ny
    layer = ET.SubElement(root, "g", {"shape-rendering": "crispEdges"})
    count = 0
    for mask, color in ((r.imt, "#5ec962"), (r.near, "#cccccc")):
        for j, i in zip(*np.nonzero(mask)):
            ET.SubElement(layer, "rect", {
                "x": f"{i * cw:.2f}",
                "y": f"{(ny - 1 - j) * ch:.2f}",
                "width": f"{cw:.2f}",
                "height": f"{ch:.2f}",
                "fill": color,
            })
            count += 1
    pts = _to_px(view, scale, top.loop.samples)
    ET.SubElement(root, "polyline", {
        "points": " ".join(f"{x:.2f},{y:.2f}" for x, y in pts),
        "fill": "none",
        "stroke": "#3b528b",
        "stroke-width": "1.5",
    })
    for w in witnesses:
        p = w.image or w.point
        (x, y), = _to_px(view, scale, np.array([[p.x, p.y]]))
        ET.SubElement(root, "circle", {
            "cx": f"{x:.2f}", "cy": f"{y:.2f}", "r": "3", "fill": "#d62728",
        })
    _write_svg(root, output)
    return count


def write_sweep_svg(reports: Sequence[EnergyReport], title: str, output: str | Path) -> int:
    """Line chart of lhs and rhs over the resolutions of a sweep."""
    res = np.array([r.resolution[0] for r in reports], dtype=np.float64)
    lhs = np.array([r.lhs for r in reports])
    rhs = np.array([r.rhs for r in reports])
    x = np.log2(res)
    ys = np.concatenate([lhs, rhs])
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 <= x0:
        x1 = x0 + 1
    if y1 <= y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    view = Rect.of(x0, y0, x1, y1)
    root, _ = _svg_root(view, title)
    # isotropic scaling would flatten the chart, so stretch each axis separately
    sx = SVG_SIZE / (x1 - x0)
    sy = SVG_SIZE / (y1 - y0)
    root.set("width", str(SVG_SIZE))
    root.set("height", str(SVG_SIZE + 24))
    root.set("viewBox", f"-40 -10 {SVG_SIZE + 60} {SVG_SIZE + 44}")
    root.find("text").set("y", str(SVG_SIZE + 28))  # type: ignore[union-attr]
    for series, color, name in ((lhs, "#3b528b", "lhs"), (rhs, "#d62728", "rhs")):
        pts = [((xi - x0) * sx, (y1 - yi) * sy) for xi, yi in zip(x, series)]
        ET.SubElement(root, "polyline", {
            "points": " ".join(f"{a:.2f},{b:.2f}" for a, b in pts),
            "fill": "none",
            "stroke": color,
            "stroke-width": "2",
        }).set("id", name)
        for a, b in pts:
            ET.SubElement(root, "circle", {"cx": f"{a:.2f}", "cy": f"{b:.2f}", "r": "3",
                                           "fill": color})
    for xi, n in zip(x, res):
        label = ET.SubElement(root, "text", {
            "x": f"{(xi - x0) * sx:.2f}", "y": f"{SVG_SIZE + 14}", "font-size": "11",
        })
        label.text = f"{int(n)}"
    _write_svg(root, output)
    return len(reports)
