# Copyright 2026 Harald Schilly <info@arjoma.at>, ARJOMA FlexCo.
# SPDX-License-Identifier: Apache-2.0

"""Command-line interface for invmap."""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable
from pathlib import Path

from invmap import __version__, parallel
from invmap.analysis import analyze
from invmap.config import (
    RunConfig,
    load_config_file,
    resolve_config,
    validate_run_config,
)
from invmap.degree import (
    default_h_loop,
    default_w_mask,
    topological_image,
    trace_boundary,
    winding_number,
)
from invmap.energy import (
    EnergyReport,
    KeyEstimateProbe,
    diverging,
    energy_identity,
    key_estimate_probe,
)
from invmap.errors import (
    InvmapError,
    MapSpecError,
    NoPreimage,
    TooCloseToBoundary,
    TooManyUndefined,
)
from invmap.formats import write_gridmap, write_provenance, write_pwa
from invmap.gallery import GalleryEntry, gallery_get, gallery_list, load_map
from invmap.geometry import Ball, BallShape, Grid, Point2, radius_schedule
from invmap.invcheck import (
    InvReport,
    StructReport,
    Verdict,
    Witness,
    check_degree_range,
    check_disjoint,
    check_inv_schedule,
    check_inverse_inv,
    check_nested,
)
from invmap.inverse import (
    build_inverse,
    default_target_grid,
    detect_jump,
    resample_inverse,
    roundtrip_residual,
)
from invmap.maps import PiecewiseAffine
from invmap.report import (
    write_cavities_csv,
    write_degree_csv,
    write_energy_csv,
    write_heatmap_svg,
    write_inv_csv,
    write_jumps_csv,
    write_key_estimate_csv,
    write_overlay_svg,
    write_pgm,
    write_rows,
    write_summary_csv,
    write_sweep_svg,
    write_witnesses_csv,
)
from invmap.verify import verify_outputs

logger = logging.getLogger("invmap")

EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_BOUNDARY = 4

# flag dest -> config key
_OVERRIDES = {
    "map": "map",
    "res": "res",
    "out": "out",
    "threads": "threads",
    "j_min": "j_min",
    "w_mask": "w_mask",
    "eps_inv": "eps_inv",
    "delta_cav": "delta_cav",
    "rho0": "rho0",
    "kappa_jump": "kappa_jump",
    "energy_tol": "energy_tol",
}


def _point(text: str) -> Point2:
    try:
        return Point2.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _radii(text: str) -> list[float]:
    try:
        radii = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated radii: {exc}") from exc
    if not radii or min(radii) <= 0:
        raise argparse.ArgumentTypeError("radii must be positive")
    return radii


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--map",
        default=None,
        metavar="SPEC",
        help="Gallery entry name(arg=value,...) or a .gridmap2 / .pwa2 file (default: identity)",
    )
    common.add_argument("--res", type=int, default=None, metavar="N",
                        help="Grid resolution per axis (default: 128)")
    common.add_argument(
        "-o",
        "--out",
        type=Path,
        default=None,
        metavar="DIR",
        help="Output directory (default: $INVMAP_OUT or out/)",
    )
    common.add_argument("--threads", type=int, default=None, metavar="N",
                        help="Worker thread cap (default: all cores)")
    common.add_argument("--config", type=Path, default=None, metavar="FILE",
                        help="KEY=VALUE config file; command-line flags win")
    th = common.add_argument_group("thresholds")
    th.add_argument("--j-min", type=float, default=None, help="Jacobian floor of the good set")
    th.add_argument("--w-mask", type=float, default=None, help="Boundary mask width")
    th.add_argument("--eps-inv", type=float, default=None, help="Allowed (INV) violation fraction")
    th.add_argument("--delta-cav", type=float, default=None, help="Minimum cavity area")
    th.add_argument("--rho0", type=float, default=None, help="Initial preimage search radius")
    th.add_argument("--kappa-jump", type=float, default=None, help="Jump detection factor")
    th.add_argument("--energy-tol", type=float, default=None,
                    help="Relative tolerance of the energy identity")
    common.add_argument("-v", "--verbose", action="store_true",
                        help="Enable verbose (DEBUG) logging")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="invmap",
        description=(
            "Numerical laboratory for planar maps: distortion, topological degree, "
            "the (INV) condition, generalized inverses and the Dirichlet energy identity."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _common_parser()
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gallery", parents=[common], help="List or export gallery maps")
    p.add_argument("--export", nargs=2, metavar=("NAME", "FILE"), default=None,
                   help="Write an entry as PWA2 (piecewise affine) or GRIDMAP2")

    sub.add_parser("analyze", parents=[common], help="Jacobian and distortion summaries")

    p = sub.add_parser("degree", parents=[common], help="Winding number or topological image")
    p.add_argument("--center", type=_point, default=Point2(0.0, 0.0), metavar="X,Y")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--square", action="store_true", help="Use a sup-norm square instead of a disk")
    p.add_argument("--point", type=_point, default=None, metavar="X,Y",
                   help="Print the degree at this point instead of rasterizing")

    p = sub.add_parser("check-inv", parents=[common], help="Sampled (INV) and structural checks")
    p.add_argument("--structural", action="store_true",
                   help="Also run nested, disjoint and degree-range checks")
    p.add_argument("--inverse", action="store_true",
                   help="Also check (INV) for the generalized inverse")

    sub.add_parser("invert", parents=[common], help="Build the generalized inverse")

    p = sub.add_parser("energy", parents=[common], help="Dirichlet energy identity")
    p.add_argument("--sweep", action="store_true",
                   help="Run at res/4, res/2 and res and plot the convergence")
    p.add_argument("--key-estimate", type=_point, default=None, metavar="X,Y",
                   help="Also probe the diameter estimate around this target point")
    p.add_argument("--p", type=float, default=1.5, help="Exponent of the diameter estimate")
    p.add_argument("--radii", type=_radii, default=[0.05, 0.1, 0.2], metavar="R,R,...",
                   help="Probe radii (default: 0.05,0.1,0.2)")
    return parser


def resolve(args: argparse.Namespace) -> RunConfig:
    """Merge flags, config file and environment; exits with 2 on invalid input."""
    file_values: dict[str, str] | None = None
    if args.config is not None:
        try:
            result = load_config_file(args.config)
        except OSError as exc:
            logger.error("Cannot read config file: %s", exc)
            sys.exit(EXIT_USAGE)
        if not result.ok:
            for e in result.errors:
                logger.error("CONFIG: %s", e)
            sys.exit(EXIT_USAGE)
        file_values = result.values

    cli = {key: getattr(args, dest) for dest, key in _OVERRIDES.items()}
    config = resolve_config(cli, file_values)
    errors = validate_run_config(config)
    if errors:
        for e in errors:
            logger.error("CONFIG: %s", e)
        sys.exit(EXIT_USAGE)
    return config


def main(argv: list[str] | None = None) -> None:
    """Main entry point for the invmap CLI."""
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )

    config = resolve(args)
    parallel.set_threads(config.threads)
    command: Callable[[argparse.Namespace, RunConfig], int] = _COMMANDS[args.command]
    try:
        code = command(args, config)
    except MapSpecError as exc:
        logger.error("Map spec error: %s", exc)
        sys.exit(EXIT_USAGE)
    except TooCloseToBoundary as exc:
        logger.error("%s", exc)
        sys.exit(EXIT_BOUNDARY)
    except (InvmapError, ValueError, OSError) as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        sys.exit(EXIT_DOMAIN)
    if code:
        sys.exit(code)


# --- commands ---


def _entry(config: RunConfig) -> GalleryEntry:
    entry = load_map(config.map_spec)
    logger.info("Map: %s (%s)", entry.map.label, entry.description)
    return entry


def _grid(entry: GalleryEntry, config: RunConfig) -> Grid:
    return Grid(entry.map.domain, config.grid_res, config.grid_res)


def _verify(out: Path, expected: dict[str, int]) -> int:
    logger.info("Verifying outputs in %s/ ...", out)
    problems = verify_outputs(out, expected)
    for p in problems:
        logger.error("VERIFY ERROR: %s", p)
    return EXIT_DOMAIN if problems else 0


def cmd_gallery(args: argparse.Namespace, config: RunConfig) -> int:
    if args.export is None:
        for name, description in gallery_list():
            entry = gallery_get(name)
            props = entry.props
            print(
                f"{name:<18} finite_distortion={props.finite_distortion!s:<5} "
                f"inv={props.satisfies_inv!s:<5} inverse={props.inverse_regularity.value:<8} "
                f"{description}"
            )
        return 0

    name, target = args.export
    entry = gallery_get(name)
    path = Path(target)
    if isinstance(entry.map, PiecewiseAffine) and path.suffix != ".gridmap2":
        n = write_pwa(entry.map, path)
        print(f"OK: wrote {n} pieces of {name} to {path}")
        return 0
    grid = _grid(entry, config)
    values = entry.map.evaluate_many(grid.centers()).reshape(grid.ny, grid.nx, 2)
    n = write_gridmap(grid, values, path)
    print(f"OK: wrote {n} nodes of {name} to {path}")
    return 0


def cmd_analyze(args: argparse.Namespace, config: RunConfig) -> int:
    entry = _entry(config)
    grid = _grid(entry, config)
    out = config.output_dir

    # --- Step 1: Analyze ---
    logger.info("Analyzing %s on %dx%d cells...", entry.map.label, grid.nx, grid.ny)
    analysis = analyze(entry.map, grid, config.thresholds.j_min)
    summary = analysis.summary()
    for key, value in summary.items():
        logger.debug("%s = %.6g", key, value)

    # --- Step 2: Write outputs ---
    logger.info("Writing outputs to %s/", out)
    n = write_summary_csv(summary, entry.map.label, out / "analysis.csv")
    write_heatmap_svg(analysis.jdet, grid, f"J_f of {entry.map.label}", out / "jdet.svg")
    write_heatmap_svg(analysis.kdist, grid, f"K_f of {entry.map.label}", out / "kdist.svg")

    # --- Step 3: Verify ---
    if _verify(out, {"analysis.csv": n}):
        return EXIT_DOMAIN

    print(
        f"OK: {entry.map.label}: K_f mean {summary['kdist_mean']:.6g}, "
        f"J_f mean {summary['jdet_mean']:.6g}, good fraction {summary['good_fraction']:.4f}"
    )
    return 0


def cmd_degree(args: argparse.Namespace, config: RunConfig) -> int:
    entry = _entry(config)
    grid = _grid(entry, config)
    shape = BallShape.SQUARE if args.square else BallShape.DISK
    ball = Ball(args.center, args.radius, shape)
    w_mask = config.thresholds.w_mask

    if args.point is not None:
        loop = trace_boundary(entry.map, ball, default_h_loop(grid))
        w = default_w_mask(grid) if w_mask is None else w_mask
        deg = winding_number(loop, args.point, w)
        logger.info("deg(f, %s, %s) = %d", ball, args.point, deg)
        print(deg)
        return 0

    # --- Step 1: Rasterize ---
    logger.info("Topological image of %s under %s...", ball, entry.map.label)
    top = topological_image(entry.map, ball, grid, w_mask=w_mask)

    # --- Step 2: Write outputs ---
    out = config.output_dir
    logger.info("Writing outputs to %s/", out)
    n_px = write_degree_csv(top.raster, out / "degree.csv")
    write_pgm(top.raster, out / "degree.pgm")
    write_overlay_svg(top, f"im_T of {ball} under {entry.map.label}", out / "degree.svg")
    n_sum = write_rows(
        out / "topimage.csv",
        ["ball", "imt_area", "e_area", "w_mask", "pixels"],
        [[str(ball), top.imt_area, top.e_area, top.raster.w_mask, n_px]],
    )

    # --- Step 3: Verify ---
    if _verify(out, {"degree.csv": n_px, "topimage.csv": n_sum}):
        return EXIT_DOMAIN

    print(f"OK: im_T area {top.imt_area:.6g}, E area {top.e_area:.6g} ({n_px} pixels)")
    return 0


def _image_balls(entry: GalleryEntry) -> list[Ball]:
    """Balls around the images of the schedule centers, for checking h."""
    centers = [entry.map.evaluate_many(c.as_array()[None, :])[0] for c in entry.centers]
    return [
        Ball(Point2.of(c), r) for c in centers for r in radius_schedule(0.5 * entry.r_max, count=3)
    ]


def cmd_check_inv(args: argparse.Namespace, config: RunConfig) -> int:
    entry = _entry(config)
    grid = _grid(entry, config)
    th = config.thresholds
    out = config.output_dir
    balls = entry.schedule_balls()

    # --- Step 1: (INV) per ball ---
    logger.info("Checking (INV) on %d ball(s)...", len(balls))
    reports: list[InvReport] = check_inv_schedule(entry.map, balls, grid, w_mask=th.w_mask)
    failed = [r for r in reports if not r.ok(th.eps_inv)]
    for r in failed:
        logger.warning("(INV) fails on %s: violation fraction %.4f", r.ball, r.viol_frac)

    # --- Step 2: Structural checks (optional) ---
    structs: list[StructReport] = []
    if args.structural:
        logger.info("Running structural checks...")
        for inner, outer in entry.schedule_nested_pairs():
            structs.append(check_nested(entry.map, inner, outer, grid, w_mask=th.w_mask))
        for b1, b2 in entry.disjoint_pairs:
            structs.append(check_disjoint(entry.map, b1, b2, grid, w_mask=th.w_mask))
        structs.append(check_degree_range(entry.map, balls, grid, w_mask=th.w_mask))
        for s in structs:
            if s.verdict is not Verdict.PASS:
                logger.warning("%s: %s", s.label, s.verdict.value)

    # --- Step 3: (INV) of the inverse (optional) ---
    inv_reports: list[InvReport] = []
    if args.inverse:
        logger.info("Building the generalized inverse...")
        analysis = analyze(entry.map, grid, th.j_min)
        target = default_target_grid(entry.map, analysis, grid.nx, grid.ny)
        inv = build_inverse(entry.map, analysis, target, rho0=th.rho0, delta_cav=th.delta_cav)
        inv_reports = check_inverse_inv(inv, _image_balls(entry), target)
        for r in inv_reports:
            if not r.ok(th.eps_inv):
                logger.warning("(INV) of h fails on %s: %.4f", r.ball, r.viol_frac)

    # --- Step 4: Write outputs ---
    logger.info("Writing outputs to %s/", out)
    n_rows = write_inv_csv(reports + inv_reports, structs, th.eps_inv, out / "check_inv.csv")
    witnesses: list[tuple[str, Witness]] = []
    for r in reports + inv_reports:
        witnesses.extend((f"inv {r.ball}", w) for w in r.witnesses)
    for s in structs:
        witnesses.extend((s.label, w) for w in s.witnesses)
    n_wit = write_witnesses_csv(witnesses, out / "witnesses.csv")
    if failed:
        top = topological_image(entry.map, failed[0].ball, grid, w_mask=th.w_mask)
        write_overlay_svg(
            top, f"(INV) witnesses on {failed[0].ball}", out / "witnesses.svg",
            failed[0].witnesses,
        )

    # --- Step 5: Verify ---
    if _verify(out, {"check_inv.csv": n_rows, "witnesses.csv": n_wit}):
        return EXIT_DOMAIN

    n_fail = (
        len(failed)
        + sum(1 for r in inv_reports if not r.ok(th.eps_inv))
        + sum(1 for s in structs if s.verdict is Verdict.FAIL)
    )
    n_inc = sum(1 for s in structs if s.verdict is Verdict.INCONCLUSIVE)
    if n_fail:
        logger.error("%d check(s) failed", n_fail)
        print(f"FAIL: {n_fail} of {n_rows} check(s) failed on {entry.map.label}")
        return EXIT_FAIL
    print(f"OK: {n_rows} check(s) passed on {entry.map.label} ({n_inc} inconclusive)")
    return 0


def cmd_invert(args: argparse.Namespace, config: RunConfig) -> int:
    entry = _entry(config)
    grid = _grid(entry, config)
    th = config.thresholds
    out = config.output_dir

    # --- Step 1: Analyze ---
    logger.info("Analyzing %s on %dx%d cells...", entry.map.label, grid.nx, grid.ny)
    analysis = analyze(entry.map, grid, th.j_min)

    # --- Step 2: Invert ---
    target = default_target_grid(entry.map, analysis, grid.nx, grid.ny)
    logger.info("Building the generalized inverse on %dx%d cells...", target.nx, target.ny)
    inv = build_inverse(entry.map, analysis, target, rho0=th.rho0, delta_cav=th.delta_cav)
    jumps = detect_jump(inv, th.kappa_jump)
    if jumps:
        logger.info("%d jump(s) in h", len(jumps))
    residual = roundtrip_residual(entry.map, inv)

    # --- Step 3: Write outputs ---
    logger.info("Writing outputs to %s/", out)
    h = resample_inverse(inv)
    write_gridmap(target, h.values, out / "inverse.gridmap2")
    write_provenance(target, inv.provenance, out / "inverse.prov")
    n_cav = write_cavities_csv(inv.cavities, out / "cavities.csv")
    n_jump = write_jumps_csv(jumps, target, out / "jumps.csv")
    counts = inv.counts()
    summary: dict[str, float] = {k: float(v) for k, v in counts.items()}
    summary["undefined_fraction"] = inv.undefined_fraction
    summary["roundtrip_residual"] = residual
    summary["target_cell_diag"] = target.cell_diag
    n_sum = write_summary_csv(summary, entry.map.label, out / "inverse.csv")

    # --- Step 4: Verify ---
    expected = {"cavities.csv": n_cav, "jumps.csv": n_jump, "inverse.csv": n_sum}
    if _verify(out, expected):
        return EXIT_DOMAIN

    print(
        f"OK: inverse of {entry.map.label}: {n_cav} cavit{'y' if n_cav == 1 else 'ies'}, "
        f"{n_jump} jump(s), roundtrip residual {residual:.3g} "
        f"(cell diagonal {target.cell_diag:.3g})"
    )
    return 0


def _energy_at(entry: GalleryEntry, config: RunConfig, res: int) -> EnergyReport:
    th = config.thresholds
    return energy_identity(
        entry.map,
        Grid(entry.map.domain, res, res),
        j_min=th.j_min,
        kappa_jump=th.kappa_jump,
        rho0=th.rho0,
        delta_cav=th.delta_cav,
    )


def cmd_energy(args: argparse.Namespace, config: RunConfig) -> int:
    entry = _entry(config)
    th = config.thresholds
    out = config.output_dir
    res = config.grid_res

    # --- Step 1: Energy identity ---
    resolutions = [max(2, res // 4), max(2, res // 2), res] if args.sweep else [res]
    reports: list[EnergyReport] = []
    try:
        for n in resolutions:
            reports.append(_energy_at(entry, config, n))
        if not args.sweep and reports[-1].jump_cells:
            # jumps in h: compare with half the resolution
            half = max(2, res // 2)
            logger.info("h has jumps; checking jump energy growth against %dx%d", half, half)
            reports.insert(0, _energy_at(entry, config, half))
    except TooManyUndefined as exc:
        logger.error("%s", exc)
        print(f"FAIL: energy of h on {entry.map.label} is not defined: {exc}")
        return EXIT_FAIL
    final = reports[-1]
    divergent = any(r.jump_cells for r in reports) and diverging(reports)

    # --- Step 2: Key estimate probe (optional) ---
    probe: KeyEstimateProbe | None = None
    if args.key_estimate is not None:
        grid = Grid(entry.map.domain, res, res)
        analysis = analyze(entry.map, grid, th.j_min)
        target = default_target_grid(entry.map, analysis, grid.nx, grid.ny)
        inv = build_inverse(entry.map, analysis, target, rho0=th.rho0, delta_cav=th.delta_cav)
        try:
            probe = key_estimate_probe(entry.map, inv, args.key_estimate, args.radii, args.p,
                                       analysis)
        except NoPreimage as exc:
            logger.warning("%s", exc)
            probe = exc.probe if isinstance(exc.probe, KeyEstimateProbe) else None

    # --- Step 3: Write outputs ---
    logger.info("Writing outputs to %s/", out)
    expected = {"energy.csv": write_energy_csv(reports, entry.map.label, out / "energy.csv")}
    if len(reports) > 1:
        write_sweep_svg(reports, f"Energy identity for {entry.map.label}", out / "energy.svg")
    if probe is not None:
        expected["key_estimate.csv"] = write_key_estimate_csv(probe, out / "key_estimate.csv")

    # --- Step 4: Verify ---
    if _verify(out, expected):
        return EXIT_DOMAIN

    if divergent:
        growth = [r.jump_energy for r in reports]
        logger.error("Jump energy diverges under refinement: %s", growth)
        print(f"FAIL: energy of h on {entry.map.label} diverges (h is not Sobolev)")
        return EXIT_FAIL
    if not final.ok(th.energy_tol):
        logger.error("Energy identity off by %.3g (tolerance %.3g)", final.rel_err, th.energy_tol)
        print(f"FAIL: lhs {final.lhs:.6g} rhs {final.rhs:.6g} rel_err {final.rel_err:.3g}")
        return EXIT_FAIL
    print(f"OK: lhs {final.lhs:.6g} rhs {final.rhs:.6g} rel_err {final.rel_err:.3g}")
    return 0


_COMMANDS: dict[str, Callable[[argparse.Namespace, RunConfig], int]] = {
    "gallery": cmd_gallery,
    "analyze": cmd_analyze,
    "degree": cmd_degree,
    "check-inv": cmd_check_inv,
    "invert": cmd_invert,
    "energy": cmd_energy,
}
