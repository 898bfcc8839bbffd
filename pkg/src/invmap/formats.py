# Copyright 2026 Harald Schilly <info@arjoma.at>, ARJOMA FlexCo.
# SPDX-License-Identifier: Apache-2.0

"""Read and write the GRIDMAP2 v1 and PWA2 v1 text formats.

GRIDMAP2 v1::

    GRIDMAP2 v1
    domain <minx> <miny> <maxx> <maxy>
    res <nx> <ny>
    <u> <v>          (nx*ny lines, row-major, x fastest)

PWA2 v1::

    PWA2 v1
    domain <minx> <miny> <maxx> <maxy>
    pieces <k>
    piece <m>
    <x> <y>          (m vertex lines, counterclockwise)
    matrix <a11> <a12> <a21> <a22>
    offset <b1> <b2>
    ...              (k piece blocks)

Parsing is whitespace-tolerant and ignores blank lines and ``#`` comments.
Writing uses 17 significant digits so values survive a round trip exactly.
"""

from __future__ import annotations

import re
from collections.abc import Iterator
from pathlib import Path

import numpy as np

from invmap.errors import MapSpecError
from invmap.geometry import FloatArray, Grid, Rect
from invmap.maps import AffinePiece, GridSampled, PiecewiseAffine

GRIDMAP_MAGIC = "GRIDMAP2 v1"
PWA_MAGIC = "PWA2 v1"
PROVENANCE_CHARS = "cgau"

_RE_WS = re.compile(r"\s+")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _lines(text: str) -> Iterator[tuple[int, list[str]]]:
    """Yield (line number, tokens) for every non-empty, non-comment line."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, _RE_WS.split(line)


class _Reader:
    """Token-line cursor with format-specific error messages."""

    def __init__(self, text: str, fmt: str) -> None:
        self._it = _lines(text)
        self.fmt = fmt
        self.lineno = 0

    def next(self, what: str) -> list[str]:
        try:
            self.lineno, tokens = next(self._it)
        except StopIteration:
            raise MapSpecError(f"{self.fmt}: unexpected end of file, expected {what}") from None
        return tokens

    def keyword(self, key: str, count: int) -> list[float]:
        tokens = self.next(f"'{key}' line")
        if tokens[0] != key or len(tokens) != count + 1:
            raise MapSpecError(
                f"{self.fmt} line {self.lineno}: expected '{key}' with {count} values, "
                f"got {' '.join(tokens)!r}"
            )
        return self.floats(tokens[1:])

    def floats(self, tokens: list[str]) -> list[float]:
        try:
            values = [float(t) for t in tokens]
        except ValueError as exc:
            raise MapSpecError(f"{self.fmt} line {self.lineno}: {exc}") from exc
        if not all(np.isfinite(values)):
            raise MapSpecError(f"{self.fmt} line {self.lineno}: non-finite value")
        return values

    def count(self, key: str) -> int:
        (value,) = self.keyword(key, 1)
        if value != int(value) or value < 1:
            raise MapSpecError(f"{self.fmt} line {self.lineno}: '{key}' must be a positive integer")
        return int(value)

    def expect_end(self) -> None:
        try:
            lineno, tokens = next(self._it)
        except StopIteration:
            return
        raise MapSpecError(f"{self.fmt} line {lineno}: trailing data {' '.join(tokens)!r}")


def _domain(reader: _Reader) -> Rect:
    minx, miny, maxx, maxy = reader.keyword("domain", 4)
    try:
        return Rect.of(minx, miny, maxx, maxy)
    except ValueError as exc:
        raise MapSpecError(f"{reader.fmt} line {reader.lineno}: {exc}") from exc


def _magic(reader: _Reader, magic: str) -> None:
    tokens = reader.next("header")
    if " ".join(tokens) != magic:
        raise MapSpecError(f"Expected header {magic!r}, got {' '.join(tokens)!r}")


# --- GRIDMAP2 ---


def parse_gridmap(text: str, name: str = "gridmap") -> GridSampled:
    """Parse GRIDMAP2 v1 text into a GridSampled map."""
    reader = _Reader(text, "GRIDMAP2")
    _magic(reader, GRIDMAP_MAGIC)
    domain = _domain(reader)
    tokens = reader.next("'res' line")
    if tokens[0] != "res" or len(tokens) != 3 or not all(t.isdigit() for t in tokens[1:]):
        raise MapSpecError(f"GRIDMAP2 line {reader.lineno}: expected 'res <nx> <ny>'")
    nx, ny = int(tokens[1]), int(tokens[2])
    if nx < 1 or ny < 1:
        raise MapSpecError(f"GRIDMAP2 line {reader.lineno}: res must be positive")
    values = np.empty((nx * ny, 2))
    for k in range(nx * ny):
        row = reader.next(f"node {k + 1} of {nx * ny}")
        if len(row) != 2:
            raise MapSpecError(f"GRIDMAP2 line {reader.lineno}: expected 'u v'")
        values[k] = reader.floats(row)
    reader.expect_end()
    return GridSampled(Grid(domain, nx, ny), values.reshape(ny, nx, 2), name=name)


def read_gridmap(path: str | Path) -> GridSampled:
    p = Path(path)
    return parse_gridmap(p.read_text(encoding="utf-8"), name=p.name)


def write_gridmap(grid: Grid, values: FloatArray, output: str | Path) -> int:
    """Write per-cell values of shape (ny, nx, 2). Returns the number of node lines."""
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    v = np.asarray(values).reshape(grid.ny * grid.nx, 2)
    d = grid.domain
    with path.open("w", encoding="utf-8", newline="\n") as f:
        f.write(GRIDMAP_MAGIC + "\n")
        f.write(f"domain {_fmt(d.min.x)} {_fmt(d.min.y)} {_fmt(d.max.x)} {_fmt(d.max.y)}\n")
        f.write(f"res {grid.nx} {grid.ny}\n")
        for u, w in v:
            f.write(f"{_fmt(float(u))} {_fmt(float(w))}\n")
    return len(v)


def write_provenance(grid: Grid, codes: np.ndarray, output: str | Path) -> int:
    """Sidecar for an inverse map: one provenance character per cell, one row per line."""
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    c = np.asarray(codes).reshape(grid.ny, grid.nx)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        for row in c:
            f.write("".join(PROVENANCE_CHARS[int(k)] for k in row) + "\n")
    return grid.size


def read_provenance(path: str | Path) -> np.ndarray:
    rows = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    try:
        return np.array([[PROVENANCE_CHARS.index(ch) for ch in row] for row in rows])
    except ValueError as exc:
        raise MapSpecError(f"Provenance file {path}: unknown tag") from exc


# --- PWA2 ---


def parse_pwa(text: str, name: str = "pwa") -> PiecewiseAffine:
    """Parse PWA2 v1 text into a PiecewiseAffine map."""
    reader = _Reader(text, "PWA2")
    _magic(reader, PWA_MAGIC)
    domain = _domain(reader)
    n_pieces = reader.count("pieces")
    pieces: list[AffinePiece] = []
    for _ in range(n_pieces):
        m = reader.count("piece")
        poly = np.array([reader.floats(reader.next("vertex")) for _ in range(m)])
        if poly.shape != (m, 2):
            raise MapSpecError(f"PWA2 line {reader.lineno}: vertices need two coordinates")
        a11, a12, a21, a22 = reader.keyword("matrix", 4)
        b1, b2 = reader.keyword("offset", 2)
        try:
            pieces.append(
                AffinePiece(poly, np.array([[a11, a12], [a21, a22]]), np.array([b1, b2]))
            )
        except ValueError as exc:
            raise MapSpecError(f"PWA2 piece {len(pieces) + 1}: {exc}") from exc
    reader.expect_end()
    try:
        return PiecewiseAffine(domain, tuple(pieces), name=name)
    except ValueError as exc:
        raise MapSpecError(f"PWA2: {exc}") from exc


def read_pwa(path: str | Path) -> PiecewiseAffine:
    p = Path(path)
    return parse_pwa(p.read_text(encoding="utf-8"), name=p.name)


def format_pwa(fmap: PiecewiseAffine) -> str:
    d = fmap.domain
    out = [
        PWA_MAGIC,
        f"domain {_fmt(d.min.x)} {_fmt(d.min.y)} {_fmt(d.max.x)} {_fmt(d.max.y)}",
        f"pieces {len(fmap.pieces)}",
    ]
    for pc in fmap.pieces:
        poly = np.asarray(pc.polygon)
        out.append(f"piece {len(poly)}")
        out.extend(f"{_fmt(float(x))} {_fmt(float(y))}" for x, y in poly)
        a = np.asarray(pc.matrix)
        out.append("matrix " + " ".join(_fmt(float(v)) for v in a.ravel()))
        b = np.asarray(pc.offset)
        out.append(f"offset {_fmt(float(b[0]))} {_fmt(float(b[1]))}")
    return "\n".join(out) + "\n"


def write_pwa(fmap: PiecewiseAffine, output: str | Path) -> int:
    """Write a PWA2 v1 file. Returns the number of pieces."""
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_pwa(fmap), encoding="utf-8")
    return len(fmap.pieces)
