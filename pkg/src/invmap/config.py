# Copyright 2026 Harald Schilly <info@arjoma.at>, ARJOMA FlexCo.
# SPDX-License-Identifier: Apache-2.0

"""Run configuration: thresholds, KEY=VALUE config files and precedence rules."""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from invmap.analysis import J_MIN_DEFAULT
from invmap.inverse import KAPPA_JUMP_DEFAULT
from invmap.invcheck import EPS_INV_DEFAULT

ENV_OUT = "INVMAP_OUT"
DEFAULT_OUT = "out"
DEFAULT_RES = 128
ENERGY_TOL_DEFAULT = 0.03

_RE_LINE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*?)\s*$")


@dataclass(frozen=True)
class Thresholds:
    """Numerical thresholds. None means: derive from the grid at run time."""

    j_min: float = J_MIN_DEFAULT
    w_mask: float | None = None  # 2 pixel diagonals
    eps_inv: float = EPS_INV_DEFAULT
    delta_cav: float | None = None  # 10 target pixel areas
    rho0: float | None = None  # 1.5 x median image cell size
    kappa_jump: float = KAPPA_JUMP_DEFAULT
    energy_tol: float = ENERGY_TOL_DEFAULT


@dataclass(frozen=True)
class RunConfig:
    map_spec: str = "identity"
    grid_res: int = DEFAULT_RES
    output_dir: Path = Path(DEFAULT_OUT)
    threads: int | None = None
    thresholds: Thresholds = field(default_factory=Thresholds)


@dataclass
class ValidationError:
    """A single problem in a config file."""

    line: int  # 1-based, 0 for whole-file problems
    key: str
    value: str | None
    message: str

    def __str__(self) -> str:
        return f"Line {self.line} [{self.key}]: {self.message} (value={self.value!r})"


@dataclass
class ValidationResult:
    values: dict[str, str]
    errors: list[ValidationError]

    @property
    def ok(self) -> bool:
        return len(self.errors) == 0


_THRESHOLD_KEYS = {f.name for f in fields(Thresholds)}
_RUN_KEYS = {"res", "out", "threads", "map"}


def _parse_value(key: str, raw: str) -> str | None:
    """Error message for an unusable value, or None."""
    if key == "out" or key == "map":
        return None if raw else "must not be empty"
    try:
        value = int(raw) if key in ("res", "threads") else float(raw)
    except ValueError:
        return "not a number"
    if value <= 0:
        return "must be positive"
    return None


def parse_config_text(text: str) -> ValidationResult:
    """Parse ``KEY=VALUE`` lines; keys are case-insensitive, ``#`` starts a comment."""
    values: dict[str, str] = {}
    errors: list[ValidationError] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _RE_LINE.match(line)
        if m is None:
            errors.append(ValidationError(lineno, "?", line, "expected KEY=VALUE"))
            continue
        key, value = m.group(1).lower(), m.group(2)
        if key not in _THRESHOLD_KEYS and key not in _RUN_KEYS:
            errors.append(ValidationError(lineno, key, value, "unknown key"))
            continue
        problem = _parse_value(key, value)
        if problem:
            errors.append(ValidationError(lineno, key, value, problem))
            continue
        values[key] = value
    return ValidationResult(values=values, errors=errors)


def load_config_file(path: str | Path) -> ValidationResult:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


def apply_values(config: RunConfig, values: dict[str, str]) -> RunConfig:
    """Overlay validated config-file values onto ``config``."""
    th = {k: float(v) for k, v in values.items() if k in _THRESHOLD_KEYS}
    run: dict[str, object] = {}
    if "res" in values:
        run["grid_res"] = int(values["res"])
    if "threads" in values:
        run["threads"] = int(values["threads"])
    if "out" in values:
        run["output_dir"] = Path(values["out"])
    if "map" in values:
        run["map_spec"] = values["map"]
    return replace(config, thresholds=replace(config.thresholds, **th), **run)  # type: ignore[arg-type]


def resolve_config(
    cli: dict[str, object],
    file_values: dict[str, str] | None = None,
    environ: dict[str, str] | None = None,
) -> RunConfig:
    """CLI flags > config file > environment (output dir only) > defaults.

    ``cli`` holds only the flags the user actually passed (None values are
    ignored), keyed like the config file.
    """
    env = os.environ if environ is None else environ
    config = RunConfig()
    if env.get(ENV_OUT):
        config = replace(config, output_dir=Path(env[ENV_OUT]))
    if file_values:
        config = apply_values(config, file_values)
    given = {k: str(v) for k, v in cli.items() if v is not None}
    return apply_values(config, given)


def validate_run_config(config: RunConfig) -> list[ValidationError]:
    """Invariants of a resolved configuration: positive thresholds and sizes."""
    errors: list[ValidationError] = []
    if config.grid_res < 2:
        errors.append(ValidationError(0, "res", str(config.grid_res), "must be >= 2"))
    if config.threads is not None and config.threads < 1:
        errors.append(ValidationError(0, "threads", str(config.threads), "must be >= 1"))
    for f in fields(Thresholds):
        value = getattr(config.thresholds, f.name)
        if value is not None and not value > 0:
            errors.append(ValidationError(0, f.name, str(value), "must be positive"))
    return errors
