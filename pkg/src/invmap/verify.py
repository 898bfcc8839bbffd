# Copyright 2026 Harald Schilly <info@arjoma.at>, ARJOMA FlexCo.
# SPDX-License-Identifier: Apache-2.0

"""Re-read written artifacts and check that they are complete and consistent."""

from __future__ import annotations

import csv
import xml.etree.ElementTree as ET
from pathlib import Path

from invmap.errors import MapSpecError
from invmap.formats import read_gridmap, read_provenance


def verify_outputs(out_dir: str | Path, expected_rows: dict[str, int] | None = None) -> list[str]:
    """Check every artifact in ``out_dir``.

    Checks:
    1. CSV: header present, every row as wide as the header, row count as expected
    2. GRIDMAP2: parses, node count matches ``res``
    3. provenance sidecar: same dimensions as the GRIDMAP2 file of the same stem
    4. PGM: P2 header, pixel count and value range
    5. SVG: well-formed, root element ``svg`` (strict parse with lxml if installed)

    ``expected_rows`` maps CSV file names to data row counts.
    Returns a list of error messages. An empty list means all checks passed.
    """
    root = Path(out_dir)
    errors: list[str] = []
    if not root.is_dir():
        return [f"{root}: output directory does not exist"]
    expected = expected_rows or {}

    for path in sorted(root.iterdir()):
        suffix = path.suffix.lower()
        if suffix == ".csv":
            errors.extend(_check_csv(path, expected.get(path.name)))
        elif suffix == ".gridmap2":
            errors.extend(_check_gridmap(path))
        elif suffix == ".pgm":
            errors.extend(_check_pgm(path))
        elif suffix == ".svg":
            errors.extend(_check_svg(path))

    for name in expected:
        if not (root / name).exists():
            errors.append(f"{name}: missing")
    return errors


def _count_csv(path: Path) -> tuple[int, int, list[int]]:
    """Return (data row count, header width, [line numbers of ragged rows])."""
    with path.open(encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, [])
        ragged: list[int] = []
        count = 0
        for row in reader:
            count += 1
            if len(row) != len(header):
                ragged.append(reader.line_num)
    return count, len(header), ragged


def _check_csv(path: Path, expected: int | None) -> list[str]:
    count, width, ragged = _count_csv(path)
    errors: list[str] = []
    if width == 0:
        errors.append(f"{path.name}: no header")
    for line in ragged[:5]:
        errors.append(f"{path.name}: line {line} does not have {width} fields")
    if expected is not None and count != expected:
        errors.append(f"{path.name}: expected {expected} rows, found {count}")
    return errors


def _check_gridmap(path: Path) -> list[str]:
    try:
        gmap = read_gridmap(path)
    except (MapSpecError, ValueError) as exc:
        return [f"{path.name}: {exc}"]
    prov = path.with_suffix(".prov")
    if not prov.exists():
        return []
    try:
        codes = read_provenance(prov)
    except MapSpecError as exc:
        return [f"{prov.name}: {exc}"]
    if codes.shape != gmap.grid.shape:
        return [f"{prov.name}: shape {codes.shape} does not match {path.name} {gmap.grid.shape}"]
    return []


def _count_pgm(path: Path) -> tuple[int, int, int, list[int]]:
    """Return (width, height, maxval, pixel values) of a plain PGM file."""
    tokens: list[str] = []
    for line in path.read_text(encoding="ascii").splitlines():
        tokens.extend(line.split("#", 1)[0].split())
    if not tokens or tokens[0] != "P2":
        raise ValueError("not a plain PGM (P2) file")
    width, height, maxval = (int(t) for t in tokens[1:4])
    return width, height, maxval, [int(t) for t in tokens[4:]]


def _check_pgm(path: Path) -> list[str]:
    try:
        width, height, maxval, pixels = _count_pgm(path)
    except ValueError as exc:
        return [f"{path.name}: {exc}"]
    errors: list[str] = []
    if len(pixels) != width * height:
        errors.append(f"{path.name}: expected {width * height} pixels, found {len(pixels)}")
    if pixels and (min(pixels) < 0 or max(pixels) > maxval):
        errors.append(f"{path.name}: pixel values outside 0..{maxval}")
    return errors


def _check_svg(path: Path) -> list[str]:
    try:
        root = ET.parse(path).getroot()
    except ET.ParseError as exc:
        return [f"{path.name}: {exc}"]
    errors: list[str] = []
    if root.tag.rsplit("}", 1)[-1] != "svg":
        errors.append(f"{path.name}: root element is {root.tag!r}, not svg")

    try:
        from lxml import etree  # type: ignore

        try:
            etree.parse(str(path), etree.XMLParser(recover=False))
        except etree.XMLSyntaxError as exc:
            errors.append(f"{path.name}: {exc}")
    except ImportError:
        pass  # Optional dependency

    return errors
