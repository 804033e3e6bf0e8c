"""Planar swimming surrogate: tail reaction forces, surge/yaw rigid body, metrics, calibration.

Fish frame is NED-like: x forward, y to starboard, heading ``psi`` positive
clockwise seen from above (as a compass/magnetometer reports it). A positive
attack angle bends the tail to port.

Tail reaction model
-------------------
Each tail element moving with normal velocity ``v_n`` meets a quasi-steady
normal drag of density ``f = rho*C_d*D(s)*v_n**2/2`` (the same integrand as
the tail drag torque). The element sheds that momentum along its own axis,
so the reaction on the fish is ``f*|sin(theta(s))|`` directed along the
element's forward tangent ``(cos(theta), sin(theta))``, where ``theta(s)`` is
the local tangent angle. Its longitudinal part drives surge; its lateral
part, acting a moment arm behind the centre of mass, drives yaw. The caudal
fin adds the same term at the tip with ``A_fin`` in place of ``D ds``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .body import BodyParams, BodyState, body_point, motor_load_profile, tail_integrals, tail_trajectory
from .errors import SimulationError
from .mechanism import MechanismGeometry, Mode, ModeCommand
from .numerics import wrap_angle
from .timeseries import TimeSeries, uniform_grid

SETTLE_TIME = 8.0


@dataclass(frozen=True)
class SwimParams:
    """Rigid-body and reaction-gain constants of the planar surrogate.

    ``thrust_coeff`` and ``steer_coeff`` default to the values returned by
    :func:`calibrate` for the default mechanism and body against a 0.32 m/s
    cruise and a 0.56 m turn radius.
    """

    body_mass: float = 2.05
    yaw_inertia: float = 0.03
    surge_drag_coeff: float = 4.0
    yaw_drag_coeff: float = 0.12
    thrust_coeff: float = 0.6048
    steer_coeff: float = 0.6250
    tail_moment_arm: float = 0.20

    def __post_init__(self):
        for name in ("body_mass", "yaw_inertia", "surge_drag_coeff", "yaw_drag_coeff",
                     "thrust_coeff", "steer_coeff", "tail_moment_arm"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"invariant violated: {name} > 0")


@dataclass(frozen=True)
class SwimState:
    x: float = 0.0
    y: float = 0.0
    psi: float = 0.0
    u: float = 0.0
    r_yaw: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.psi, self.u, self.r_yaw)):
            raise ValueError("swim state must be finite")
        object.__setattr__(self, "psi", wrap_angle(self.psi))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.psi, self.u, self.r_yaw])


def reaction_from_raw(params: SwimParams, f_long, f_lat):
    """Scale raw longitudinal/lateral tail forces into thrust (N) and yaw moment (N m).

    A lateral force towards starboard at the tail, behind the centre of mass,
    yaws the nose to port (negative ``psi`` rate).
    """
    f_long = np.asarray(f_long)
    f_lat = np.asarray(f_lat)
    return params.thrust_coeff * f_long, -params.steer_coeff * params.tail_moment_arm * f_lat


def tail_reaction(params: SwimParams, body: BodyParams, state: BodyState):
    """Instantaneous ``(F_thrust, M_yaw)`` exerted on the head by the tail."""
    raw = tail_integrals(body, state.theta_a, state.theta_a_dot)[0]
    thrust, moment = reaction_from_raw(params, raw[3], raw[4])
    return float(thrust), float(moment)


def _integrate(params: SwimParams, state0: SwimState, force, moment, dt):
    out = kernels.swim_rk4(
        state0.as_array(), force, moment, dt,
        params.body_mass, params.yaw_inertia, params.surge_drag_coeff, params.yaw_drag_coeff,
    )
    bad = ~np.isfinite(out)
    if np.any(bad):
        row = int(np.argmax(bad.any(axis=1)))
        raise SimulationError("non-finite swim state", row * dt)
    return out


def step_swim(params: SwimParams, state: SwimState, f_thrust: float, m_yaw: float, dt: float) -> SwimState:
    """Advance the surge/yaw model one RK4 step with constant forcing.

    ``m u' = F - c_u u|u|``, ``I r' = M - c_r r|r|``, ``x' = u cos psi``,
    ``y' = u sin psi``, ``psi' = r``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    out = _integrate(params, state, np.full(3, f_thrust), np.full(3, m_yaw), dt)[-1]
    return SwimState(*out)


@dataclass
class TailForcing:
    """Raw tail forcing sampled every half step (``2n+1`` samples)."""

    t_half: np.ndarray
    theta1: np.ndarray
    theta_a: np.ndarray
    theta_a_dot: np.ndarray
    f_long: np.ndarray
    f_lat: np.ndarray


def tail_forcing(geom: MechanismGeometry, body: BodyParams, cmd: ModeCommand, t0: float,
                 n_steps: int, dt: float) -> TailForcing:
    t_half = t0 + 0.5 * dt * np.arange(2 * n_steps + 1)
    theta1, _, _, theta_a, theta_a_dot = tail_trajectory(geom, body, cmd, t_half)
    raw = tail_integrals(body, theta_a, theta_a_dot)
    return TailForcing(t_half, theta1, theta_a, theta_a_dot, raw[:, 3].copy(), raw[:, 4].copy())


SWIM_CHANNELS = ("x_m", "y_m", "psi_rad", "u_m_per_s", "r_rad_per_s")


def simulate_swimming(geom: MechanismGeometry, body: BodyParams, swim: SwimParams, cmd: ModeCommand,
                      t_end: float, dt: float, initial: SwimState | None = None,
                      with_torques: bool = True) -> TimeSeries:
    """Open-loop swim under a fixed drive command.

    Tail forcing is evaluated on the half-step grid so each RK4 stage sees the
    forcing at its own time. Channels: pose and rates, wheel-1 angle, attack
    angle, thrust, yaw moment, unwrapped heading and (optionally) motor torques.
    """
    initial = initial or SwimState()
    t = uniform_grid(0.0, t_end, dt)
    n = len(t) - 1
    forcing = tail_forcing(geom, body, cmd, 0.0, n, dt)
    thrust, moment = reaction_from_raw(swim, forcing.f_long, forcing.f_lat)
    states = _integrate(swim, initial, thrust, moment, dt)
    cols = dict(
        x_m=states[:, 0],
        y_m=states[:, 1],
        psi_rad=wrap_angle(states[:, 2]),
        u_m_per_s=states[:, 3],
        r_rad_per_s=states[:, 4],
        theta1_rad=forcing.theta1[::2],
        theta_a_rad=forcing.theta_a[::2],
        F_thrust_N=thrust[::2],
        M_yaw_Nm=moment[::2],
        heading_unwrapped_rad=states[:, 2],
    )
    if with_torques:
        loads = motor_load_profile(geom, body, cmd, t_end, dt)
        cols["tau1_Nm"] = loads["tau1_Nm"]
        cols["tau2_Nm"] = loads["tau2_Nm"]
    return TimeSeries.from_columns(t, **cols)


# -- metrics -----------------------------------------------------------------

def strouhal_number(tail_peak_to_peak: float, frequency: float, mean_speed: float) -> float:
    """``St = f A / U``."""
    if not mean_speed > 0:
        raise ValueError("mean speed must be positive")
    return frequency * tail_peak_to_peak / mean_speed


def tail_peak_to_peak(geom: MechanismGeometry, body: BodyParams, cmd: ModeCommand, n: int = 2000) -> float:
    """Lateral excursion of the tail tip over one drive cycle (tail frame)."""
    if cmd.omega == 0:
        return 0.0
    t = np.linspace(0.0, 2 * math.pi / abs(cmd.omega), n, endpoint=False)
    *_, theta_a, _ = tail_trajectory(geom, body, cmd, t)
    tip_y = np.array([body_point(body, ta, body.spine_length)[1] for ta in theta_a])
    return float(tip_y.max() - tip_y.min())


def cycle_times(series: TimeSeries, omega: float, settle: float = 0.0) -> np.ndarray:
    """Drive-cycle boundaries ``t = 2 pi k / |omega|`` inside the series, at or after ``settle``."""
    if omega == 0:
        raise ValueError("omega must be non-zero for cycle averaging")
    period = 2 * math.pi / abs(omega)
    t = series.t
    first = math.ceil(max(settle, t[0]) / period - 1e-9)
    last = math.floor(t[-1] / period + 1e-9)
    return period * np.arange(first, last + 1)


def cycle_means(series: TimeSeries, channel: str, omega: float, settle: float = 0.0) -> np.ndarray:
    """Mean of a channel over each complete drive cycle after ``settle`` (trapezoid rule)."""
    edges = cycle_times(series, omega, settle)
    t = series.t
    vals = series[channel]
    area = np.concatenate([[0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * np.diff(t))])
    at = np.interp(edges, t, area)
    return np.diff(at) / np.diff(edges)


def fit_circle(x, y):
    """Algebraic least-squares circle fit; returns ``(xc, yc, radius)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3:
        raise ValueError("need at least three points to fit a circle")
    a = np.column_stack([x, y, np.ones_like(x)])
    b = x * x + y * y
    sol, *_ = np.linalg.lstsq(a, b, rcond=None)
    xc, yc = sol[0] / 2, sol[1] / 2
    return float(xc), float(yc), float(math.sqrt(sol[2] + xc * xc + yc * yc))


def course_deviation(x, y) -> float:
    """Largest distance of the points from their least-squares straight line."""
    pts = np.column_stack([x, y])
    pts = pts - pts.mean(axis=0)
    if len(pts) < 2:
        return 0.0
    # smallest singular value direction is the line normal
    _, _, vt = np.linalg.svd(pts, full_matrices=False)
    return float(np.max(np.abs(pts @ vt[-1])))


@dataclass
class SwimMetrics:
    mean_speed: float
    mean_yaw_rate: float
    turn_radius: float
    course_deviation: float
    distance: float
    window_radii: np.ndarray = field(default_factory=lambda: np.empty(0))


def swim_metrics(series: TimeSeries, omega: float, settle: float = SETTLE_TIME) -> SwimMetrics:
    """Cycle-averaged speed and yaw rate plus path geometry sampled at cycle boundaries.

    Sampling the pose once per drive cycle removes the intra-cycle wobble, so
    the fitted circle radius and the straight-course deviation describe the
    mean path only. ``window_radii`` holds the radius fitted to each run of
    three consecutive boundary points.
    """
    edges = cycle_times(series, omega, settle)
    if len(edges) < 2:
        raise ValueError("series too short: no complete drive cycle after the settle time")
    speed = float(np.mean(cycle_means(series, "u_m_per_s", omega, settle)))
    yaw = float(np.mean(cycle_means(series, "r_rad_per_s", omega, settle)))
    t = series.t
    x = np.interp(edges, t, series["x_m"])
    y = np.interp(edges, t, series["y_m"])
    if len(edges) >= 3 and abs(yaw) > 1e-9:
        radius = fit_circle(x, y)[2]
        windows = np.array([fit_circle(x[i:i + 3], y[i:i + 3])[2] for i in range(len(x) - 2)])
    else:
        radius = math.inf
        windows = np.empty(0)
    return SwimMetrics(
        mean_speed=speed,
        mean_yaw_rate=yaw,
        turn_radius=radius,
        course_deviation=course_deviation(x, y),
        distance=float(math.hypot(x[-1] - x[0], y[-1] - y[0])),
        window_radii=windows,
    )


# -- calibration -------------------------------------------------------------

CALIBRATABLE = ("thrust_coeff", "steer_coeff", "surge_drag_coeff", "yaw_drag_coeff")


@dataclass(frozen=True)
class CalibrationTargets:
    cruise_speed: float = 0.32
    turn_radius: float = 0.56

    def __post_init__(self):
        if not (self.cruise_speed > 0 and self.turn_radius > 0):
            raise ValueError("calibration targets must be positive")


class CalibrationError(SimulationError):
    def __init__(self, message, best_residual, best_params):
        super().__init__(f"{message}; best residual {best_residual:.4g}")
        self.best_residual = best_residual
        self.best_params = best_params


@dataclass
class CalibrationResult:
    params: SwimParams
    cruise_speed: float
    turn_radius: float
    residual: float
    evaluations: int


CRUISE_COMMAND = ModeCommand(Mode.SYMMETRIC, 2 * math.pi)
TURN_COMMAND = ModeCommand(Mode.ASYMMETRIC, 2 * math.pi, -math.pi / 2)
_GOLDEN = (math.sqrt(5) - 1) / 2


def calibrate(geom: MechanismGeometry, body: BodyParams, initial: SwimParams,
              targets: CalibrationTargets = CalibrationTargets(),
              free_params=("thrust_coeff", "steer_coeff"),
              cruise_cmd: ModeCommand = CRUISE_COMMAND, turn_cmd: ModeCommand = TURN_COMMAND,
              t_end: float = 16.0, dt: float = 1e-3, settle: float = SETTLE_TIME,
              tol: float = 0.02, max_rounds: int = 12, golden_iters: int = 30) -> CalibrationResult:
    """Fit surrogate coefficients so cruise speed and turn radius hit their targets.

    Coordinate descent over the free parameters, each a golden-section search
    in log space on a factor-of-four bracket around the current value,
    minimising the summed squared relative error. Returns as soon as both
    relative errors are within ``tol / 4``; raises :class:`CalibrationError`
    if ``tol`` is not reached within ``max_rounds``.
    """
    for name in free_params:
        if name not in CALIBRATABLE:
            raise ValueError(f"cannot calibrate {name!r}; choose from {CALIBRATABLE}")
    n = round(t_end / dt)
    cruise = tail_forcing(geom, body, cruise_cmd, 0.0, n, dt)
    turn = tail_forcing(geom, body, turn_cmd, 0.0, n, dt)
    t = uniform_grid(0.0, t_end, dt)
    evaluations = 0

    def measure(p: SwimParams):
        nonlocal evaluations
        evaluations += 2
        out = []
        for forcing, cmd in ((cruise, cruise_cmd), (turn, turn_cmd)):
            thrust, moment = reaction_from_raw(p, forcing.f_long, forcing.f_lat)
            states = _integrate(p, SwimState(), thrust, moment, dt)
            ts = TimeSeries.from_columns(
                t, x_m=states[:, 0], y_m=states[:, 1], psi_rad=states[:, 2],
                u_m_per_s=states[:, 3], r_rad_per_s=states[:, 4],
            )
            out.append(swim_metrics(ts, cmd.omega, settle))
        return out[0].mean_speed, out[1].turn_radius

    def errors(p):
        speed, radius = measure(p)
        return (speed / targets.cruise_speed - 1.0, radius / targets.turn_radius - 1.0), speed, radius

    def cost(p):
        (e1, e2), *_ = errors(p)
        return e1 * e1 + e2 * e2

    params = initial
    errs, speed, radius = errors(params)
    for _ in range(max_rounds):
        if max(abs(e) for e in errs) <= tol / 4:
            break
        for name in free_params:
            centre = math.log(getattr(params, name))
            lo, hi = centre - math.log(4.0), centre + math.log(4.0)
            a = hi - _GOLDEN * (hi - lo)
            b = lo + _GOLDEN * (hi - lo)
            fa = cost(replace(params, **{name: math.exp(a)}))
            fb = cost(replace(params, **{name: math.exp(b)}))
            for _ in range(golden_iters):
                if fa < fb:
                    hi, b, fb = b, a, fa
                    a = hi - _GOLDEN * (hi - lo)
                    fa = cost(replace(params, **{name: math.exp(a)}))
                else:
                    lo, a, fa = a, b, fb
                    b = lo + _GOLDEN * (hi - lo)
                    fb = cost(replace(params, **{name: math.exp(b)}))
            candidate = replace(params, **{name: math.exp(0.5 * (lo + hi))})
            if cost(candidate) < errs[0] ** 2 + errs[1] ** 2:
                params = candidate
                errs, speed, radius = errors(params)
    residual = max(abs(e) for e in errs)
    if residual > tol:
        raise CalibrationError("calibration did not converge", residual, params)
    return CalibrationResult(params, speed, radius, residual, evaluations)
