# Copyright 2026 Harald Schilly <info@arjoma.at>, ARJOMA FlexCo.
# SPDX-License-Identifier: Apache-2.0

"""Catalog of example and counterexample maps with known ground truth.

Entries are looked up by spec strings of the form ``name`` or
``name(arg=value,...)``, e.g. ``linear(a=2,b=1)``. Declared properties are
claims the test suite checks, not trusted inputs.
"""

from __future__ import annotations

import re
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

import numpy as np

from invmap.errors import MapSpecError, UnknownEntry
from invmap.formats import parse_pwa, read_gridmap, read_pwa
from invmap.geometry import Ball, BallShape, FloatArray, Point2, Rect, radius_schedule
from invmap.maps import Analytic, PlanarMap, compose

_RE_SPEC = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*$")
_RE_ARG = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*([^=]+?)\s*$")


class InverseRegularity(str, Enum):
    SOBOLEV = "Sobolev"
    BV_ONLY = "BV-only"
    NA = "n/a"


@dataclass(frozen=True)
class GalleryProps:
    """Declared properties of an entry."""

    finite_distortion: bool
    satisfies_inv: bool
    inverse_regularity: InverseRegularity
    known_cavities: tuple[tuple[Point2, str], ...] = ()


@dataclass(frozen=True, eq=False)
class GalleryEntry:
    """A named map plus its declared properties and default test balls."""

    name: str
    map: PlanarMap
    props: GalleryProps
    description: str
    source: str  # where the construction comes from
    centers: tuple[Point2, ...] = ()
    r_max: float = 0.5
    shape: BallShape = BallShape.DISK
    fixed_balls: tuple[Ball, ...] = ()
    nested_pairs: tuple[tuple[Ball, Ball], ...] = ()
    disjoint_pairs: tuple[tuple[Ball, Ball], ...] = ()
    extras: dict[str, Point2] = field(default_factory=dict)

    def schedule_balls(self) -> list[Ball]:
        """Fixed balls first, then the geometric radius schedule around every center."""
        balls = list(self.fixed_balls)
        for c in self.centers:
            balls.extend(Ball(c, r, self.shape) for r in radius_schedule(self.r_max))
        return balls

    def schedule_nested_pairs(self) -> list[tuple[Ball, Ball]]:
        """Declared pairs, then consecutive radii of the schedule (inner, outer)."""
        pairs = list(self.nested_pairs)
        for c in self.centers:
            radii = radius_schedule(self.r_max)
            pairs.extend(
                (Ball(c, r_in, self.shape), Ball(c, r_out, self.shape))
                for r_out, r_in in zip(radii, radii[1:])
            )
        return pairs


# --- closed-form maps ---


def _identity(domain: Rect) -> Analytic:
    return Analytic(
        name="identity",
        params=(),
        domain=domain,
        func=lambda p: np.array(p, copy=True),
        jac=lambda p: np.broadcast_to(np.eye(2), (len(p), 2, 2)).copy(),
    )


def _linear(a: float, b: float) -> Analytic:
    if a == 0 or b == 0:
        raise MapSpecError(f"linear(a,b) needs nonzero a and b, got a={a}, b={b}")
    mat = np.diag([a, b])
    return Analytic(
        name="linear",
        params=(("a", a), ("b", b)),
        domain=Rect.of(-2, -2, 2, 2),
        func=lambda p: p @ mat.T,
        jac=lambda p: np.broadcast_to(mat, (len(p), 2, 2)).copy(),
        boundary_homeo=a * b > 0,
    )


def _unit_dirs(p: FloatArray) -> tuple[FloatArray, FloatArray]:
    r = np.hypot(p[:, 0], p[:, 1])
    safe = np.where(r > 0, r, 1.0)
    u = np.where(r[:, None] > 0, p / safe[:, None], np.array([1.0, 0.0]))
    return r, u


def _radial_func(p: FloatArray) -> FloatArray:
    _, u = _unit_dirs(p)
    return p + u  # (1 + |x|) x / |x|


def _radial_jac(p: FloatArray) -> FloatArray:
    r, u = _unit_dirs(p)
    proj = np.eye(2)[None] - u[:, :, None] * u[:, None, :]
    safe = np.where(r > 0, r, 1.0)
    jac = np.eye(2)[None] + proj / safe[:, None, None]
    jac[r == 0] = 0.0
    return jac  # type: ignore[no-any-return]


def _radial_cavitation() -> Analytic:
    return Analytic(
        name="radial_cavitation",
        params=(),
        domain=Rect.of(-1, -1, 1, 1),
        func=_radial_func,
        jac=_radial_jac,
        singular=((0.0, 0.0),),
        omega_ball=Ball(Point2(0.0, 0.0), 1.0),
    )


def cube_cavitation_map(center: Point2, r: float, domain: Rect | None = None) -> Analytic:
    """``c + r (x - c) / |x - c|_inf`` on the square Q(c, r), identity outside.

    Every point of Q(c, r) lands on its boundary, which stays fixed. The center
    itself goes to the midpoint of the right side.
    """
    if r <= 0:
        raise MapSpecError(f"cube_cavitation needs r > 0, got {r}")
    c = center.as_array()
    dom = domain or Rect.of(center.x - 2 * r, center.y - 2 * r, center.x + 2 * r, center.y + 2 * r)

    def func(p: FloatArray) -> FloatArray:
        d = p - c
        m = np.max(np.abs(d), axis=1)
        inside = m <= r
        safe = np.where(m > 0, m, 1.0)
        pushed = np.where(m[:, None] > 0, c + r * d / safe[:, None], c + np.array([r, 0.0]))
        return np.where(inside[:, None], pushed, p)  # type: ignore[no-any-return]

    def jac(p: FloatArray) -> FloatArray:
        d = p - c
        ax, ay = np.abs(d[:, 0]), np.abs(d[:, 1])
        m = np.maximum(ax, ay)
        out = np.broadcast_to(np.eye(2), (len(p), 2, 2)).copy()
        inside = (m <= r) & (m > 0)
        xdom = inside & (ax >= ay)
        ydom = inside & (ax < ay)
        # x-dominant: k = c + r d / |d_x|, so only d_y varies along the side
        sx = np.sign(d[:, 0])
        mx = np.where(xdom, ax, 1.0)
        out[xdom] = 0.0
        out[xdom, 1, 0] = (-r * d[:, 1] * sx / mx**2)[xdom]
        out[xdom, 1, 1] = (r / mx)[xdom]
        sy = np.sign(d[:, 1])
        my = np.where(ydom, ay, 1.0)
        out[ydom] = 0.0
        out[ydom, 0, 0] = (r / my)[ydom]
        out[ydom, 0, 1] = (-r * d[:, 0] * sy / my**2)[ydom]
        out[m == 0] = 0.0
        return out  # type: ignore[no-any-return]

    return Analytic(
        name="cube_cavitation",
        params=(("cx", center.x), ("cy", center.y), ("r", r)),
        domain=dom,
        func=func,
        jac=jac,
        singular=((center.x, center.y),),
    )


def _fold() -> Analytic:
    def jac(p: FloatArray) -> FloatArray:
        out = np.zeros((len(p), 2, 2))
        out[:, 0, 0] = 1.0
        out[:, 1, 1] = np.where(p[:, 1] >= 0, 1.0, -1.0)
        return out

    return Analytic(
        name="fold",
        params=(),
        domain=Rect.of(-1, -1, 1, 1),
        func=lambda p: np.column_stack([p[:, 0], np.abs(p[:, 1])]),
        jac=jac,
        boundary_homeo=False,
    )


# bv_inverse: on [0,3]x[0,1] the map is (x,y), (1,y), (x-1,y) on the three unit
# columns. Outside the strip 0 <= y <= 1 it blends linearly (in y) into the
# homeomorphism x -> -1 + 0.8 (x + 1), which maps [-1,4] onto [-1,3].


def _bv_parts(p: FloatArray) -> tuple[FloatArray, ...]:
    x, y = p[:, 0], p[:, 1]
    squeeze = np.where(x < 1, x, np.where(x < 2, 1.0, x - 1))
    dsqueeze = np.where((x >= 1) & (x < 2), 0.0, 1.0)
    lin = -1 + 0.8 * (x + 1)
    s = np.clip(1 - np.maximum(np.maximum(-y, y - 1), 0.0), 0.0, 1.0)
    ds = np.where(y < 0, 1.0, np.where(y > 1, -1.0, 0.0))
    return squeeze, dsqueeze, lin, s, ds


def _bv_func(p: FloatArray) -> FloatArray:
    squeeze, _, lin, s, _ = _bv_parts(p)
    return np.column_stack([s * squeeze + (1 - s) * lin, p[:, 1]])


def _bv_jac(p: FloatArray) -> FloatArray:
    squeeze, dsqueeze, lin, s, ds = _bv_parts(p)
    out = np.zeros((len(p), 2, 2))
    out[:, 0, 0] = s * dsqueeze + (1 - s) * 0.8
    out[:, 0, 1] = ds * (squeeze - lin)
    out[:, 1, 1] = 1.0
    return out


def _bv_inverse() -> Analytic:
    return Analytic(
        name="bv_inverse",
        params=(),
        domain=Rect.of(-1, -1, 4, 2),
        func=_bv_func,
        jac=_bv_jac,
    )


# --- bad_inv_nofd ---

Q_BIG = Ball(Point2(0.0, 0.0), 1.0, BallShape.SQUARE)
Q1 = Ball(Point2(-0.25, 0.75), 0.25, BallShape.SQUARE)
Q2 = Ball(Point2(0.25, 0.75), 0.25, BallShape.SQUARE)
Q3 = Ball(Point2(-0.25, 1.25), 0.25, BallShape.SQUARE)
# Q-tilde is the union of the three cubes; this point lies 0.25 inside it.
QTILDE_POINT = Point2(-0.25, 0.75)


def skeleton_map() -> PlanarMap:
    """The committed piecewise-affine map that follows the three cube cavitations."""
    text = resources.files("invmap").joinpath("data/bad_inv_nofd.pwa2").read_text("utf-8")
    return parse_pwa(text, name="bad_inv_nofd skeleton")


def _bad_inv_nofd() -> PlanarMap:
    domain = Rect.of(-2, -2, 2, 2)
    cubes = [cube_cavitation_map(q.center, q.radius, domain) for q in (Q1, Q2, Q3)]
    return compose(
        [*cubes, skeleton_map()],
        name="bad_inv_nofd",
        singular=[(q.center.x, q.center.y) for q in (Q2, Q3)],
    )


# --- catalog ---


@dataclass(frozen=True)
class _Recipe:
    description: str
    build: Callable[[dict[str, float]], GalleryEntry]
    defaults: dict[str, float] = field(default_factory=dict)


def _entry_identity(_: dict[str, float]) -> GalleryEntry:
    return GalleryEntry(
        name="identity",
        map=_identity(Rect.of(-2, -2, 2, 2)),
        props=GalleryProps(True, True, InverseRegularity.SOBOLEV),
        description="identity on [-2,2]^2",
        source="trivial reference map",
        centers=(Point2(0.0, 0.0),),
        r_max=1.0,
        disjoint_pairs=(
            (Ball(Point2(-1.0, 0.0), 0.3), Ball(Point2(1.0, 0.0), 0.3)),
        ),
    )


def _entry_linear(args: dict[str, float]) -> GalleryEntry:
    a, b = args["a"], args["b"]
    return GalleryEntry(
        name="linear",
        map=_linear(a, b),
        props=GalleryProps(a * b > 0, a * b > 0, InverseRegularity.SOBOLEV),
        description="diagonal linear map diag(a,b) on [-2,2]^2",
        source="closed-form diagonal matrix",
        centers=(Point2(0.0, 0.0),),
        r_max=1.0,
    )


def _entry_radial(_: dict[str, float]) -> GalleryEntry:
    return GalleryEntry(
        name="radial_cavitation",
        map=_radial_cavitation(),
        props=GalleryProps(
            True,
            True,
            InverseRegularity.SOBOLEV,
            ((Point2(0.0, 0.0), "closed unit disk"),),
        ),
        description="(1+|x|) x/|x| on B(0,1): opens the unit disk at the origin",
        source="classical radial cavitation",
        centers=(Point2(0.0, 0.0),),
        r_max=0.6,
        disjoint_pairs=(
            (Ball(Point2(0.5, 0.0), 0.2), Ball(Point2(-0.5, 0.0), 0.2)),
        ),
    )


def _entry_cube(args: dict[str, float]) -> GalleryEntry:
    c = Point2(args["cx"], args["cy"])
    r = args["r"]
    return GalleryEntry(
        name="cube_cavitation",
        map=cube_cavitation_map(c, r),
        props=GalleryProps(
            False,
            True,
            InverseRegularity.BV_ONLY,
            ((c, f"closed square Q(c,{r:g})"),),
        ),
        description="c + r(x-c)/|x-c|_inf on Q(c,r): the square collapses onto its boundary",
        source="square cavitation, recentered so the boundary of Q(c,r) stays fixed",
        centers=(c,),
        r_max=1.5 * r,
        shape=BallShape.SQUARE,
    )


def _entry_fold(_: dict[str, float]) -> GalleryEntry:
    return GalleryEntry(
        name="fold",
        map=_fold(),
        props=GalleryProps(False, False, InverseRegularity.NA),
        description="(x,|y|): folds the lower half onto the upper half",
        source="control map that violates (INV)",
        centers=(Point2(0.0, -0.5),),
        r_max=0.4,
    )


def _entry_bv(_: dict[str, float]) -> GalleryEntry:
    return GalleryEntry(
        name="bv_inverse",
        map=_bv_inverse(),
        props=GalleryProps(False, True, InverseRegularity.BV_ONLY),
        description="Lipschitz map collapsing [1,2]x[0,1] onto a segment; inverse jumps",
        source="piecewise map (x,y) | (1,y) | (x-1,y) with a Lipschitz blend to the boundary",
        centers=(Point2(1.5, 0.5),),
        r_max=1.0,
    )


def _entry_bad(_: dict[str, float]) -> GalleryEntry:
    return GalleryEntry(
        name="bad_inv_nofd",
        map=_bad_inv_nofd(),
        props=GalleryProps(
            False,
            True,
            InverseRegularity.NA,
            tuple((q.center, "union of Q1, Q2, Q3") for q in (Q1, Q2, Q3)),
        ),
        description="(INV) map without finite distortion: degree -1 on Q1, nested images fail",
        source="three cube cavitations followed by a committed piecewise-affine skeleton map",
        fixed_balls=(Q_BIG, Q1, Q2, Q3),
        nested_pairs=((Q1, Q_BIG),),
        disjoint_pairs=((Q1, Q2),),
        extras={"qtilde_point": QTILDE_POINT},
    )


_CATALOG: dict[str, _Recipe] = {
    "identity": _Recipe("identity map on [-2,2]^2", _entry_identity),
    "linear": _Recipe("diag(a,b) linear map", _entry_linear, {"a": 2.0, "b": 1.0}),
    "radial_cavitation": _Recipe("(1+|x|)x/|x|, cavity at the origin", _entry_radial),
    "cube_cavitation": _Recipe(
        "square cavitation on Q(c,r)", _entry_cube, {"cx": 0.0, "cy": 0.0, "r": 1.0}
    ),
    "bad_inv_nofd": _Recipe("(INV) without finite distortion, degree -1 on Q1", _entry_bad),
    "bv_inverse": _Recipe("Lipschitz map whose inverse is BV but not Sobolev", _entry_bv),
    "fold": _Recipe("(x,|y|), violates (INV)", _entry_fold),
}


def parse_spec(spec: str) -> tuple[str, dict[str, float]]:
    """Split ``name(arg=value,...)`` into the name and a dict of float arguments."""
    m = _RE_SPEC.match(spec)
    if m is None:
        raise MapSpecError(f"Malformed map spec {spec!r}, expected name(arg=value,...)")
    name, argtext = m.group(1), m.group(2)
    args: dict[str, float] = {}
    if argtext and argtext.strip():
        for part in argtext.split(","):
            am = _RE_ARG.match(part)
            if am is None:
                raise MapSpecError(f"Malformed argument {part.strip()!r} in {spec!r}")
            try:
                args[am.group(1)] = float(am.group(2))
            except ValueError as exc:
                raise MapSpecError(f"Argument {am.group(1)!r} in {spec!r}: {exc}") from exc
    return name, args


def gallery_get(spec: str) -> GalleryEntry:
    """Look up a catalog entry by ``name`` or ``name(arg=value,...)``."""
    name, args = parse_spec(spec)
    recipe = _CATALOG.get(name)
    if recipe is None:
        raise UnknownEntry(f"Unknown gallery entry {name!r}; known: {', '.join(_CATALOG)}")
    unknown = set(args) - set(recipe.defaults)
    if unknown:
        raise MapSpecError(f"{name} takes no argument(s) {', '.join(sorted(unknown))}")
    return recipe.build({**recipe.defaults, **args})


def gallery_list() -> list[tuple[str, str]]:
    """(name, one-line description) for every entry, in catalog order."""
    return [(name, recipe.description) for name, recipe in _CATALOG.items()]


def load_map(spec: str) -> GalleryEntry:
    """Gallery spec or path to a ``.gridmap2`` / ``.pwa2`` file."""
    path = Path(spec)
    if path.suffix in (".gridmap2", ".pwa2"):
        if not path.is_file():
            raise MapSpecError(f"Map file not found: {path}")
        fmap: PlanarMap = read_gridmap(path) if path.suffix == ".gridmap2" else read_pwa(path)
        d = fmap.domain
        return GalleryEntry(
            name=path.name,
            map=fmap,
            props=GalleryProps(False, False, InverseRegularity.NA),
            description=f"map loaded from {path.name}",
            source=str(path),
            centers=(d.center,),
            r_max=0.25 * min(d.width, d.height),
        )
    return gallery_get(spec)
