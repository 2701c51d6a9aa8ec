"""Line-oriented ``key = value`` configuration with mandatory rate units.

Every rate (and detuning grid bound) must carry a unit suffix: ``MHz``
multiplies the number by 2*pi and reads it as rad/us, ``rad/us`` takes it
verbatim.  Bare numbers for rates are rejected to prevent silent 2*pi
mistakes.  Amplitudes, counts and strings are plain values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .errors import ConfigError
from .model import OptomechParams

TWO_PI = 2.0 * math.pi

# keys whose values are angular rates and therefore need a unit suffix
RATE_KEYS = frozenset(
    {"g0", "omega_m", "kappa", "gamma_m", "delta_p", "delta_s_start", "delta_s_stop"}
)
FLOAT_KEYS = frozenset({"e_pump", "e_signal", "pump_start", "pump_stop", "tolerance"})
INT_KEYS = frozenset({"points", "pump_points", "workers"})
STR_KEYS = frozenset({"scale", "pump_scale", "method", "branch_policy", "out_dir"})
REQUIRED_KEYS = frozenset({"g0", "omega_m", "kappa", "gamma_m", "delta_p"})
ALL_KEYS = RATE_KEYS | FLOAT_KEYS | INT_KEYS | STR_KEYS


@dataclass(frozen=True)
class RunConfig:
    """Fully unit-normalized run configuration (all rates in rad/us)."""

    params: OptomechParams
    e_pump: float = 0.0
    e_signal: float = 1e-3
    delta_s_start: float = -5.0
    delta_s_stop: float = 5.0
    points: int = 201
    scale: str = "linear"
    pump_start: float = 0.0
    pump_stop: float = 100.0
    pump_points: int = 101
    pump_scale: str = "linear"
    method: str = "linearized"
    branch_policy: str = "lowest"
    out_dir: str = "."
    workers: int = 1
    tolerance: float = 1e-9


def _parse_rate(raw: str, line_no: int):
    parts = raw.split()
    if len(parts) != 2:
        raise ConfigError(
            f"rate value {raw!r} needs a unit suffix ('MHz' or 'rad/us')", line_no
        )
    number, unit = parts
    try:
        value = float(number)
    except ValueError:
        raise ConfigError(f"bad number {number!r}", line_no) from None
    if unit == "MHz":
        return value * TWO_PI
    if unit == "rad/us":
        return value
    raise ConfigError(f"unknown unit {unit!r} (expected 'MHz' or 'rad/us')", line_no)


def parse_config(text: str) -> RunConfig:
    """Parse configuration text into a RunConfig; unknown keys are errors."""
    seen: dict = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", line_no)
        key, raw = (s.strip() for s in body.split("=", 1))
        if key not in ALL_KEYS:
            raise ConfigError(f"unknown key {key!r}", line_no)
        if key in seen:
            raise ConfigError(f"duplicate key {key!r}", line_no)
        if key in RATE_KEYS:
            seen[key] = _parse_rate(raw, line_no)
        elif key in FLOAT_KEYS:
            try:
                seen[key] = float(raw)
            except ValueError:
                raise ConfigError(f"bad number {raw!r}", line_no) from None
        elif key in INT_KEYS:
            try:
                seen[key] = int(raw)
            except ValueError:
                raise ConfigError(f"bad integer {raw!r}", line_no) from None
        else:
            seen[key] = raw

    missing = sorted(REQUIRED_KEYS - seen.keys())
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    try:
        params = OptomechParams(
            g0=seen.pop("g0"),
            omega_m=seen.pop("omega_m"),
            kappa=seen.pop("kappa"),
            gamma_m=seen.pop("gamma_m"),
            delta_p=seen.pop("delta_p"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(params=params, **seen)


def serialize(config: RunConfig) -> str:
    """Render a RunConfig as parseable text; parse(serialize(c)) == c."""
    p = config.params
    lines = [
        f"g0 = {p.g0!r} rad/us",
        f"omega_m = {p.omega_m!r} rad/us",
        f"kappa = {p.kappa!r} rad/us",
        f"gamma_m = {p.gamma_m!r} rad/us",
        f"delta_p = {p.delta_p!r} rad/us",
    ]
    for f in fields(RunConfig):
        if f.name == "params":
            continue
        value = getattr(config, f.name)
        if f.name in RATE_KEYS:
            lines.append(f"{f.name} = {value!r} rad/us")
        elif isinstance(value, float):
            lines.append(f"{f.name} = {value!r}")
        else:
            lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"
