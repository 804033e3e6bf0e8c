"""Heading feedback: the held wheel angle is set proportionally to the heading error.

Heading is sampled once per revolution of the driving wheel, when it passes
its mean position (``theta1`` a multiple of 2 pi). At that instant the tail is
near its neutral pose, so the head points along the mean course. The new hold
angle is applied from the next simulation step and held until the next
crossing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .body import BodyParams
from .mechanism import MechanismGeometry, Mode, ModeCommand
from .numerics import wrap_angle
from .swim import SwimParams, SwimState, _integrate, reaction_from_raw, tail_forcing
from .timeseries import TimeSeries, uniform_grid


@dataclass(frozen=True)
class ControllerConfig:
    """Proportional heading law ``theta2 = clamp(k_p * wrap(psi_target - psi))``.

    ``k_i`` is an optional integral gain on the sampled error (rad/(rad s));
    the default of zero gives the pure proportional law.
    """

    k_p: float = 1.0
    psi_target: float = 0.0
    omega_cmd: float = 2 * math.pi
    theta2_limit: float = math.pi / 2
    k_i: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.k_p) and self.k_p > 0):
            raise ValueError("invariant violated: k_p > 0")
        if not 0 < self.theta2_limit <= math.pi:
            raise ValueError("invariant violated: theta2_limit in (0, pi]")
        if not -math.pi < self.psi_target <= math.pi:
            raise ValueError("invariant violated: psi_target in (-pi, pi]")
        if not (math.isfinite(self.omega_cmd) and self.omega_cmd != 0):
            raise ValueError("invariant violated: omega_cmd finite and non-zero")
        if not (math.isfinite(self.k_i) and self.k_i >= 0):
            raise ValueError("invariant violated: k_i >= 0")


@dataclass(frozen=True)
class HeadingSample:
    t_mean: float
    psi_robot: float

    def __post_init__(self):
        object.__setattr__(self, "psi_robot", wrap_angle(self.psi_robot))


def _crossings(t, theta1):
    two_pi = 2 * math.pi
    level = theta1 / two_pi
    out = []
    if len(t) and level[0] == math.floor(level[0]):
        out.append(float(t[0]))
    for i in range(len(t) - 1):
        a, b = level[i], level[i + 1]
        if b > a:
            ks = range(math.floor(a) + 1, math.floor(b) + 1)
        elif b < a:
            ks = range(math.ceil(a) - 1, math.ceil(b) - 1, -1)
        else:
            continue
        for k in ks:
            frac = (k - a) / (b - a)
            out.append(float(t[i] + frac * (t[i + 1] - t[i])))
    return out


def detect_mean_crossing(series: TimeSeries, channel: str = "theta1_rad") -> list:
    """Times at which ``theta1`` passes a multiple of 2 pi, by linear interpolation.

    A series starting exactly on a multiple reports its first timestamp. A
    constant angle yields no crossings.
    """
    return _crossings(series.t, np.asarray(series[channel], dtype=float))


def heading_error(cfg: ControllerConfig, psi_robot: float) -> float:
    """Shortest signed angle from the measured heading to the target."""
    return float(wrap_angle(cfg.psi_target - psi_robot))


def control_update(cfg: ControllerConfig, sample: HeadingSample, integral: float = 0.0) -> float:
    """Held-wheel command for one heading sample."""
    cmd = cfg.k_p * heading_error(cfg, sample.psi_robot) + cfg.k_i * integral
    return float(min(max(cmd, -cfg.theta2_limit), cfg.theta2_limit))


@dataclass
class ClosedLoopResult:
    series: TimeSeries
    samples: list = field(default_factory=list)
    commands: list = field(default_factory=list)


def closed_loop_simulate(geom: MechanismGeometry, body: BodyParams, swim: SwimParams, cfg: ControllerConfig,
                         t_end: float, dt: float, initial: SwimState | None = None) -> ClosedLoopResult:
    """Swim in asymmetric mode with the hold angle refreshed at each mean crossing.

    Output channels: pose and rates, wheel angles, attack angle, thrust, yaw
    moment and the command in force over the step starting at each row.
    """
    state = (initial or SwimState()).as_array()
    t = uniform_grid(0.0, t_end, dt)
    n = len(t) - 1
    theta1 = cfg.omega_cmd * t
    crossings = _crossings(t, theta1)
    # first grid index at or after each crossing; the new command starts there
    starts = [min(int(math.ceil(tc / dt - 1e-9)), n) for tc in crossings]

    rows = np.empty((n + 1, 5))
    rows[0] = state
    theta2_cmd = np.zeros(n + 1)
    cols = {k: np.zeros(n + 1) for k in ("theta_a_rad", "F_thrust_N", "M_yaw_Nm")}
    samples, commands = [], []
    hold = 0.0
    integral = 0.0
    bounds = sorted(set(starts + [0, n]))
    ci = 0
    for seg_start, seg_end in zip(bounds[:-1], bounds[1:]):
        while ci < len(crossings) and starts[ci] == seg_start:
            tc = crossings[ci]
            if seg_start > 0 and tc < t[seg_start]:
                w = (t[seg_start] - tc) / dt
                psi = (1 - w) * rows[seg_start, 2] + w * rows[seg_start - 1, 2]
            else:
                psi = rows[seg_start, 2]
            sample = HeadingSample(tc, psi)
            if samples:
                integral += heading_error(cfg, sample.psi_robot) * (tc - samples[-1].t_mean)
            samples.append(sample)
            hold = control_update(cfg, sample, integral)
            commands.append(hold)
            ci += 1
        steps = seg_end - seg_start
        cmd = ModeCommand(Mode.ASYMMETRIC, cfg.omega_cmd, hold)
        forcing = tail_forcing(geom, body, cmd, t[seg_start], steps, dt)
        thrust, moment = reaction_from_raw(swim, forcing.f_long, forcing.f_lat)
        seg = _integrate(swim, SwimState(*rows[seg_start]), thrust, moment, dt)
        # keep the unwrapped heading continuous across segments
        seg[:, 2] += rows[seg_start, 2] - seg[0, 2]
        rows[seg_start:seg_end + 1] = seg
        theta2_cmd[seg_start:seg_end + 1] = hold
        cols["theta_a_rad"][seg_start:seg_end + 1] = forcing.theta_a[::2]
        cols["F_thrust_N"][seg_start:seg_end + 1] = thrust[::2]
        cols["M_yaw_Nm"][seg_start:seg_end + 1] = moment[::2]

    series = TimeSeries.from_columns(
        t,
        x_m=rows[:, 0],
        y_m=rows[:, 1],
        psi_rad=wrap_angle(rows[:, 2]),
        u_m_per_s=rows[:, 3],
        r_rad_per_s=rows[:, 4],
        theta1_rad=theta1,
        theta2_cmd_rad=theta2_cmd,
        heading_error_rad=wrap_angle(cfg.psi_target - rows[:, 2]),
        heading_unwrapped_rad=rows[:, 2],
        **cols,
    )
    return ClosedLoopResult(series, samples, commands)


@dataclass
class StepMetrics:
    steady_state_error: float
    response_time: float
    turn_rate: float


def step_metrics(result: ClosedLoopResult, cfg: ControllerConfig, tail_samples: int = 5,
                 band: float = 0.1) -> StepMetrics:
    """Steady-state error, response time and mean turn rate of a heading step.

    Steady-state error is the mean absolute sampled error over the last
    ``tail_samples`` crossings. Response time is the first time the error
    falls within ``band`` of the initial error; turn rate is the heading
    change over that time.
    """
    if len(result.samples) < tail_samples:
        raise ValueError("not enough heading samples for step metrics")
    errs = [abs(heading_error(cfg, s.psi_robot)) for s in result.samples[-tail_samples:]]
    series = result.series
    err = np.abs(series["heading_error_rad"])
    initial = err[0]
    inside = np.nonzero(err <= band * initial)[0]
    if initial == 0 or len(inside) == 0:
        return StepMetrics(float(np.mean(errs)), math.inf, 0.0)
    i = int(inside[0])
    heading = series["heading_unwrapped_rad"]
    t_resp = float(series.t[i])
    rate = abs(heading[i] - heading[0]) / t_resp if t_resp > 0 else math.inf
    return StepMetrics(float(np.mean(errs)), t_resp, float(rate))
