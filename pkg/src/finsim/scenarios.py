"""Scenario registry, CSV emission and run manifests."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .body import motor_load_profile
from .config import ScenarioConfig, check_grid, format_config
from .control import closed_loop_simulate, step_metrics
from .errors import ConfigError, OutputError
from .mechanism import Mode, ModeCommand, generate_mode_trajectory
from .swim import calibrate, simulate_swimming, strouhal_number, swim_metrics, tail_peak_to_peak
from .timeseries import TimeSeries

MANIFEST_NAME = "manifest.txt"


def emit_timeseries(series: TimeSeries, path) -> Path:
    """Write ``series`` as CSV: header of channel names, 9 significant digits, LF endings."""
    path = Path(path)
    lines = [",".join(series.channels)]
    lines.extend(",".join("%.9g" % v for v in row) for row in series.data)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from None
    return path


def write_manifest(cfg: ScenarioConfig, metrics: dict, files, path) -> Path:
    """Config echo followed by ``metrics.*`` lines; parses back to ``cfg``."""
    path = Path(path)
    body = format_config(cfg)
    body += f"metrics.files = {', '.join(files)}\n"
    for key, value in metrics.items():
        body += f"metrics.{key} = {_fmt(value)}\n"
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(body)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from None
    return path


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    default_t_end: float
    run: Callable


def _drive(cfg: ScenarioConfig, mode=None) -> ModeCommand:
    d = cfg.drive
    return ModeCommand(mode or d.mode, d.omega, d.theta2_hold)


def _mode_sweep(cfg, t_end, out):
    files, metrics = {}, {}
    sym = generate_mode_trajectory(cfg.geometry, _drive(cfg, Mode.SYMMETRIC), t_end, cfg.dt)
    asym = generate_mode_trajectory(cfg.geometry, _drive(cfg, Mode.ASYMMETRIC), t_end, cfg.dt)
    files["mode_sweep_symmetric.csv"] = sym
    files["mode_sweep_asymmetric.csv"] = asym
    for tag, ts in (("symmetric", sym), ("asymmetric", asym)):
        th3 = ts["theta3_rad"]
        metrics[f"{tag}_theta3_mean_rad"] = float(np.mean(th3[:-1]))
        metrics[f"{tag}_theta3_min_rad"] = float(th3.min())
        metrics[f"{tag}_theta3_max_rad"] = float(th3.max())
    return files, metrics


def _torque(cfg, t_end, out):
    loads = motor_load_profile(cfg.geometry, cfg.body, _drive(cfg, Mode.SYMMETRIC), t_end, cfg.dt)
    metrics = {
        "peak_tau1_nm": float(np.max(np.abs(loads["tau1_Nm"]))),
        "peak_tau2_nm": float(np.max(np.abs(loads["tau2_Nm"]))),
        "peak_wire_tension_n": float(np.max(np.abs(loads["T_wire_N"]))),
    }
    metrics["peak_torque_nm"] = max(metrics["peak_tau1_nm"], metrics["peak_tau2_nm"])
    return {"torque_1hz.csv": loads}, metrics


def _swim_common(cfg, t_end, mode):
    cmd = _drive(cfg, mode)
    ts = simulate_swimming(cfg.geometry, cfg.body, cfg.swim, cmd, t_end, cfg.dt)
    m = swim_metrics(ts, cmd.omega)
    metrics = {
        "mean_speed_m_per_s": m.mean_speed,
        "mean_yaw_rate_rad_per_s": m.mean_yaw_rate,
        "yaw_speed_deg_per_s": math.degrees(abs(m.mean_yaw_rate)),
        "turn_radius_m": m.turn_radius,
        "course_deviation_m": m.course_deviation,
        "peak_torque_nm": float(max(np.abs(ts["tau1_Nm"]).max(), np.abs(ts["tau2_Nm"]).max())),
        "yaw_rate_amplitude_rad_per_s": float(0.5 * np.ptp(ts["r_rad_per_s"][len(ts) // 2:])),
    }
    return ts, cmd, metrics


def _swim_forward(cfg, t_end, out):
    ts, cmd, metrics = _swim_common(cfg, t_end, Mode.SYMMETRIC)
    amp = tail_peak_to_peak(cfg.geometry, cfg.body, cmd)
    metrics["tail_peak_to_peak_m"] = amp
    metrics["strouhal_number"] = strouhal_number(amp, cmd.frequency, metrics["mean_speed_m_per_s"])
    return {"swim_forward.csv": ts}, metrics


def _turn(cfg, t_end, out):
    ts, _, metrics = _swim_common(cfg, t_end, Mode.ASYMMETRIC)
    return {"turn.csv": ts}, metrics


def _heading_step(cfg, t_end, out):
    ctl = cfg.controller
    result = closed_loop_simulate(cfg.geometry, cfg.body, cfg.swim, ctl, t_end, cfg.dt)
    m = step_metrics(result, ctl)
    samples = TimeSeries(
        ("t_s", "psi_robot_rad", "theta2_cmd_rad"),
        np.array([[s.t_mean, s.psi_robot, c] for s, c in zip(result.samples, result.commands)]),
    ) if _uniform([s.t_mean for s in result.samples]) else None
    files = {"heading_step.csv": result.series}
    if samples is not None:
        files["heading_samples.csv"] = samples
    metrics = {
        "steady_state_error_rad": m.steady_state_error,
        "response_time_s": m.response_time,
        "turn_rate_deg_per_s": math.degrees(m.turn_rate),
        "heading_samples": len(result.samples),
    }
    return files, metrics


def _uniform(t):
    if len(t) < 2:
        return len(t) == 1
    d = np.diff(t)
    return bool(np.all(d > 0) and np.ptp(d) <= 1e-9 * max(1.0, abs(t[-1])))


def _calibrate(cfg, t_end, out):
    cal = cfg.calibration
    result = calibrate(
        cfg.geometry, cfg.body, cfg.swim, cal.targets, cal.free_params,
        t_end=t_end, dt=cfg.dt, tol=cal.tol,
    )
    calibrated = replace(cfg, swim=result.params, name="swim-forward")
    path = Path(out) / "calibrated.cfg"
    try:
        path.write_text(format_config(calibrated), encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from None
    metrics = {
        "cruise_speed_m_per_s": result.cruise_speed,
        "turn_radius_m": result.turn_radius,
        "residual": result.residual,
        "evaluations": result.evaluations,
    }
    for name in cal.free_params:
        metrics[name] = getattr(result.params, name)
    return {}, metrics


SCENARIOS = {
    s.name: s
    for s in (
        Scenario("mode-sweep", "reel angle trajectories in symmetric and asymmetric drive", 2.0, _mode_sweep),
        Scenario("torque-1hz", "motor torques needed for symmetric 1 Hz tail beating", 2.0, _torque),
        Scenario("swim-forward", "straight cruising: mean speed and Strouhal number", 16.0, _swim_forward),
        Scenario("turn", "steady turning with wheel 2 held: radius and yaw speed", 16.0, _turn),
        Scenario("heading-step", "closed-loop heading step: settling and steady-state error", 30.0, _heading_step),
        Scenario("calibrate", "fit the swim gains to the cruise speed and turn radius targets", 16.0, _calibrate),
    )
}


@dataclass
class RunResult:
    out_dir: Path
    files: list
    metrics: dict


def resolve_t_end(cfg: ScenarioConfig) -> float:
    scenario = get_scenario(cfg.name)
    t_end = cfg.t_end if cfg.t_end is not None else scenario.default_t_end
    try:
        check_grid(t_end, cfg.dt)
    except ValueError as exc:
        raise ConfigError(f"scenario {cfg.name}: {exc}") from None
    return t_end


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise ConfigError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}") from None


def run_scenario(cfg: ScenarioConfig, out_dir=None) -> RunResult:
    """Run one scenario and write its CSV files and manifest into ``out_dir``."""
    scenario = get_scenario(cfg.name)
    t_end = resolve_t_end(cfg)
    out = Path(out_dir if out_dir is not None else cfg.output_path)
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create {out}: {exc.strerror or exc}") from None
    series, metrics = scenario.run(cfg, t_end, out)
    names = []
    for name, ts in series.items():
        emit_timeseries(ts, out / name)
        names.append(name)
    if cfg.name == "calibrate":
        names.append("calibrated.cfg")
    write_manifest(cfg, metrics, names, out / MANIFEST_NAME)
    return RunResult(out, names, metrics)
