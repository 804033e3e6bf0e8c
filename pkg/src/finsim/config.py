"""Scenario configuration: a flat ``section.key_unit = value`` text format.

Blank lines and ``#`` comments are ignored. Every key carries its unit in
its name. Lists are comma separated. Keys under ``metrics.`` are accepted and
ignored so a run manifest parses back to the configuration that produced it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .body import BodyParams
from .control import ControllerConfig
from .errors import ConfigError
from .mechanism import MechanismGeometry, Mode
from .swim import CALIBRATABLE, CalibrationTargets, SwimParams


@dataclass(frozen=True)
class DriveConfig:
    mode: Mode = Mode.SYMMETRIC
    frequency: float = 1.0
    theta2_hold: float = -math.pi / 2

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not (math.isfinite(self.frequency) and self.frequency >= 0):
            raise ValueError("invariant violated: frequency_hz >= 0")
        if not -math.pi <= self.theta2_hold <= math.pi:
            raise ValueError("invariant violated: theta2_hold_rad in [-pi, pi]")

    @property
    def omega(self) -> float:
        return 2 * math.pi * self.frequency


@dataclass(frozen=True)
class CalibrationConfig:
    cruise_speed: float = 0.32
    turn_radius: float = 0.56
    free_params: tuple = ("thrust_coeff", "steer_coeff")
    tol: float = 0.02

    def __post_init__(self):
        CalibrationTargets(self.cruise_speed, self.turn_radius)
        object.__setattr__(self, "free_params", tuple(self.free_params))
        if not self.free_params:
            raise ValueError("invariant violated: at least one free parameter")
        for name in self.free_params:
            if name not in CALIBRATABLE:
                raise ValueError(f"invariant violated: free_params subset of {', '.join(CALIBRATABLE)}")
        if not 0 < self.tol < 1:
            raise ValueError("invariant violated: 0 < tol < 1")

    @property
    def targets(self) -> CalibrationTargets:
        return CalibrationTargets(self.cruise_speed, self.turn_radius)


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "swim-forward"
    t_end: Optional[float] = None
    dt: float = 1e-3
    output_path: str = "out"
    geometry: MechanismGeometry = field(default_factory=MechanismGeometry)
    body: BodyParams = field(default_factory=BodyParams)
    swim: SwimParams = field(default_factory=SwimParams)
    # the heading-step scenario steps from psi = 0 to this target
    controller: ControllerConfig = field(default_factory=lambda: ControllerConfig(**_SECTION_DEFAULTS["controller"]))
    drive: DriveConfig = field(default_factory=DriveConfig)
    calibration: CalibrationConfig = field(default_factory=CalibrationConfig)

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError("invariant violated: dt_s > 0")
        if self.t_end is not None:
            check_grid(self.t_end, self.dt)


def check_grid(t_end: float, dt: float):
    if not (math.isfinite(t_end) and t_end > 0):
        raise ValueError("invariant violated: t_end_s > 0")
    steps = t_end / dt
    if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
        raise ValueError("invariant violated: dt_s divides t_end_s")


# defaults that differ from the section class's own
_SECTION_DEFAULTS = {"controller": {"psi_target": math.pi}}

# section -> {key in file: (field name, kind)}
_SCHEMA = {
    "scenario": {
        "name": ("name", "str"),
        "t_end_s": ("t_end", "auto_float"),
        "dt_s": ("dt", "float"),
        "output_path": ("output_path", "str"),
    },
    "geometry": {
        "wheel_radius_m": ("wheel_radius", "float"),
        "reel_radius_m": ("reel_radius", "float"),
        "offset_l1_m": ("offset_l1", "float"),
        "offset_l2_m": ("offset_l2", "float"),
    },
    "body": {
        "spine_length_m": ("spine_length", "float"),
        "wire_offset_m": ("wire_offset", "float"),
        "stiffness_nm_per_rad": ("stiffness", "float"),
        "damping_nms_per_rad": ("damping", "float"),
        "drag_coeff": ("drag_coeff", "float"),
        "water_density_kg_per_m3": ("water_density", "float"),
        "fin_area_m2": ("fin_area", "float"),
        "section_masses_kg": ("section_masses", "floats"),
        "section_coms_m": ("section_coms", "floats"),
        "diameter_root_m": ("diameter_root", "float"),
        "diameter_tip_m": ("diameter_tip", "float"),
        "added_mass_coeff": ("added_mass_coeff", "float"),
        "n_grid": ("n_grid", "int"),
    },
    "swim": {
        "body_mass_kg": ("body_mass", "float"),
        "yaw_inertia_kg_m2": ("yaw_inertia", "float"),
        "surge_drag_coeff_kg_per_m": ("surge_drag_coeff", "float"),
        "yaw_drag_coeff_nms2_per_rad2": ("yaw_drag_coeff", "float"),
        "thrust_coeff": ("thrust_coeff", "float"),
        "steer_coeff": ("steer_coeff", "float"),
        "tail_moment_arm_m": ("tail_moment_arm", "float"),
    },
    "controller": {
        "k_p": ("k_p", "float"),
        "k_i_per_s": ("k_i", "float"),
        "psi_target_rad": ("psi_target", "float"),
        "theta2_limit_rad": ("theta2_limit", "float"),
        "omega_cmd_rad_per_s": ("omega_cmd", "float"),
    },
    "drive": {
        "mode": ("mode", "str"),
        "frequency_hz": ("frequency", "float"),
        "theta2_hold_rad": ("theta2_hold", "float"),
    },
    "calibration": {
        "cruise_speed_m_per_s": ("cruise_speed", "float"),
        "turn_radius_m": ("turn_radius", "float"),
        "free_params": ("free_params", "strs"),
        "tol": ("tol", "float"),
    },
}


def _convert(kind, text):
    if kind == "str":
        return text
    if kind == "int":
        return int(text)
    if kind == "auto_float":
        return None if text == "auto" else _convert("float", text)
    if kind == "float":
        v = float(text)
        if not math.isfinite(v):
            raise ValueError("value must be finite")
        return v
    items = [item.strip() for item in text.split(",") if item.strip()]
    if kind == "strs":
        return tuple(items)
    return tuple(_convert("float", item) for item in items)


def _format(kind, value):
    if kind == "floats":
        return ", ".join(repr(float(v)) for v in value)
    if kind == "strs":
        return ", ".join(value)
    if kind == "auto_float":
        return "auto" if value is None else repr(float(value))
    if kind == "float":
        return repr(float(value))
    if isinstance(value, Mode):
        return value.value
    return str(value)


def parse_config(text: str, source: str = "<config>") -> ScenarioConfig:
    """Parse configuration text; every failure is a :class:`ConfigError` naming the line."""
    values: dict[str, dict] = {section: {} for section in _SCHEMA}
    seen: dict[str, list] = {section: [] for section in _SCHEMA}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        section, _, name = key.partition(".")
        if section == "metrics":
            continue
        if section not in _SCHEMA or name not in _SCHEMA[section]:
            raise ConfigError(f"{where}: unknown key {key!r}")
        attr, kind = _SCHEMA[section][name]
        if attr in values[section]:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        try:
            values[section][attr] = _convert(kind, value)
        except ValueError as exc:
            raise ConfigError(f"{where}: bad value for {key!r}: {exc}") from None
        seen[section].append(f"{key} (line {lineno})")

    def build(section, cls, **extra):
        try:
            return cls(**{**_SECTION_DEFAULTS.get(section, {}), **values[section]}, **extra)
        except ValueError as exc:
            keys = ", ".join(seen[section]) or "defaults only"
            raise ConfigError(f"{source}: {section}: {exc}; set by {keys}") from None

    drive = build("drive", DriveConfig)
    controller_vals = values["controller"]
    if "omega_cmd" not in controller_vals and drive.frequency > 0:
        controller_vals["omega_cmd"] = drive.omega
    parts = dict(
        geometry=build("geometry", MechanismGeometry),
        body=build("body", BodyParams),
        swim=build("swim", SwimParams),
        controller=build("controller", ControllerConfig),
        drive=drive,
        calibration=build("calibration", CalibrationConfig),
    )
    cfg = build("scenario", ScenarioConfig, **parts)
    return cfg


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror or exc}") from None
    return parse_config(text, str(path))


def _section_object(cfg: ScenarioConfig, section: str):
    return cfg if section == "scenario" else getattr(cfg, section)


def format_config(cfg: ScenarioConfig) -> str:
    """Serialise every setting (defaults included) so that parsing returns an equal config."""
    out = []
    for section, keys in _SCHEMA.items():
        obj = _section_object(cfg, section)
        for key, (attr, kind) in keys.items():
            out.append(f"{section}.{key} = {_format(kind, getattr(obj, attr))}")
    return "\n".join(out) + "\n"


def with_overrides(cfg: ScenarioConfig, **changes) -> ScenarioConfig:
    try:
        return replace(cfg, **changes)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def config_keys() -> list:
    return [f"{section}.{key}" for section, keys in _SCHEMA.items() for key in keys]


__all__ = [
    "CalibrationConfig", "DriveConfig", "ScenarioConfig", "config_keys", "format_config",
    "load_config", "parse_config", "with_overrides",
]
