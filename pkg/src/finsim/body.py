"""Constant-curvature elastic tail: shape, energies, fluid loads and inverse dynamics.

The tail is a spine of length ``L`` clamped to the head at ``s = 0`` that
bends into a circular arc; its whole shape is fixed by the attack angle
``theta_a`` (tangent angle at the tip). Positions are expressed in the
tail frame: x along the undeformed spine, y towards the side the tail bends
to for positive ``theta_a``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import kernels
from .errors import SimulationError
from .mechanism import MechanismGeometry, ModeCommand, motor_torques_from_load, reel_trajectory
from .numerics import Grid1D
from .timeseries import TimeSeries, uniform_grid


@dataclass(frozen=True)
class BodyParams:
    """Tail model parameters (SI units).

    Section centres of mass default to ``L/6, L/2, 5L/6``. The diameter
    profile tapers linearly from ``diameter_root`` to ``diameter_tip`` unless a
    callable ``diameter_profile`` is supplied. ``added_mass_coeff`` scales the
    ``rho * D(s)`` added-mass line density.
    """

    spine_length: float = 0.25
    wire_offset: float = 0.010
    stiffness: float = 0.248
    damping: float = 0.02
    drag_coeff: float = 1.2
    water_density: float = 1000.0
    fin_area: float = 0.010
    section_masses: tuple[float, ...] = (0.06, 0.06, 0.06)
    section_coms: Optional[tuple[float, ...]] = None
    diameter_root: float = 0.060
    diameter_tip: float = 0.015
    added_mass_coeff: float = 1.0
    n_grid: int = 101
    diameter_profile: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)

    def __post_init__(self):
        L = self.spine_length
        for name in ("spine_length", "wire_offset", "stiffness"):
            if not getattr(self, name) > 0:
                raise ValueError(f"invariant violated: {name} > 0")
        for name in ("damping", "drag_coeff", "fin_area", "water_density", "added_mass_coeff",
                     "diameter_root", "diameter_tip"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"invariant violated: {name} >= 0")
        object.__setattr__(self, "section_masses", tuple(float(m) for m in self.section_masses))
        if self.section_coms is None:
            n = len(self.section_masses)
            coms = tuple(L * (2 * i + 1) / (2 * n) for i in range(n))
            object.__setattr__(self, "section_coms", coms)
        else:
            object.__setattr__(self, "section_coms", tuple(float(c) for c in self.section_coms))
        if len(self.section_coms) != len(self.section_masses):
            raise ValueError("invariant violated: section_masses and section_coms have equal length")
        if any(m < 0 for m in self.section_masses):
            raise ValueError("invariant violated: section_masses >= 0")
        if any(not 0 <= c <= L for c in self.section_coms):
            raise ValueError("invariant violated: 0 <= section_coms <= spine_length")
        Grid1D(0.0, L, self.n_grid)  # validates n_grid
        if np.any(self.diameter(self.grid().points()) < 0):
            raise ValueError("invariant violated: diameter profile >= 0")

    def grid(self) -> Grid1D:
        return Grid1D(0.0, self.spine_length, self.n_grid)

    def diameter(self, s):
        s = np.asarray(s, dtype=float)
        if self.diameter_profile is not None:
            return np.asarray(self.diameter_profile(s), dtype=float)
        return self.diameter_root + (self.diameter_tip - self.diameter_root) * s / self.spine_length


@dataclass(frozen=True)
class BodyState:
    theta_a: float
    theta_a_dot: float = 0.0
    theta_a_ddot: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.theta_a, self.theta_a_dot, self.theta_a_ddot)):
            raise ValueError("body state must be finite")
        if not abs(self.theta_a) < math.pi:
            raise ValueError("invariant violated: |theta_a| < pi")


@dataclass(frozen=True)
class LoadReport:
    M_wire: float
    T_wire: float
    M_elastic: float
    Q_drag: float
    Q_damp: float
    kinetic_energy: float
    potential_energy: float


def attack_angle_from_reel(params: BodyParams, theta3, theta3_dot, reel_radius: float):
    """Tail attack angle and rate from the reel angle: ``theta_a = R_b theta3 / d``."""
    ratio = reel_radius / params.wire_offset
    theta_a = ratio * np.asarray(theta3, dtype=float)
    theta_a_dot = ratio * np.asarray(theta3_dot, dtype=float)
    if np.any(np.abs(theta_a) >= math.pi):
        raise SimulationError("attack angle reaches pi: the arc would close on itself")
    if theta_a.ndim == 0:
        return float(theta_a), float(theta_a_dot)
    return theta_a, theta_a_dot


def _check_s(params, s):
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or np.any(s > params.spine_length):
        raise ValueError("arc length s must lie in [0, L]")
    return s


def body_point(params: BodyParams, theta_a, s):
    """Point ``(x, y)`` at arc length ``s`` on the bent spine."""
    s = _check_s(params, s)
    rx, ry, *_ = kernels.shape_terms(theta_a, s / params.spine_length, params.spine_length)
    return np.stack([rx, ry])


def body_tangent(params: BodyParams, theta_a, s):
    """Unit tangent ``dr/ds`` at arc length ``s`` (tangent angle ``theta_a s / L``)."""
    s = _check_s(params, s)
    ang = np.asarray(theta_a) * s / params.spine_length
    return np.stack([np.cos(ang), np.sin(ang)])


def shape_jacobian(params: BodyParams, theta_a, s):
    """``(dr/dtheta_a, d2r/dtheta_a2)`` at arc length ``s``, each a stacked ``(x, y)`` array."""
    s = _check_s(params, s)
    _, _, jx, jy, hx, hy = kernels.shape_terms(theta_a, s / params.spine_length, params.spine_length)
    return np.stack([jx, jy]), np.stack([hx, hy])


def tail_integrals(params: BodyParams, theta_a, theta_a_dot) -> np.ndarray:
    """Kernel call: columns ``I_eff, dI_dtheta, Q_drag, F_long, F_lat`` per sample."""
    grid = params.grid()
    s = grid.points()
    return kernels.tail_integrals(
        np.atleast_1d(np.asarray(theta_a, dtype=float)),
        np.atleast_1d(np.asarray(theta_a_dot, dtype=float)),
        s,
        grid.weights(),
        params.diameter(s),
        np.asarray(params.section_masses, dtype=float),
        np.asarray(params.section_coms, dtype=float),
        params.spine_length,
        params.water_density,
        params.drag_coeff,
        params.fin_area,
        params.added_mass_coeff,
    )


def effective_inertia(params: BodyParams, theta_a):
    """``(I_eff, dI_eff/dtheta_a)``: added-mass line integral plus lumped sections."""
    out = tail_integrals(params, theta_a, 0.0 * np.asarray(theta_a, dtype=float))
    if np.ndim(theta_a) == 0:
        return float(out[0, 0]), float(out[0, 1])
    return out[:, 0], out[:, 1]


def kinetic_energy(params: BodyParams, theta_a: float, theta_a_dot: float):
    """``(T, I_eff, dI_eff/dtheta_a)`` with ``T = I_eff * theta_a_dot**2 / 2``."""
    out = tail_integrals(params, theta_a, theta_a_dot)[0]
    i_eff, di = float(out[0]), float(out[1])
    if not (math.isfinite(i_eff) and math.isfinite(di)):
        raise SimulationError(f"non-finite tail inertia at theta_a={theta_a!r}")
    return 0.5 * i_eff * theta_a_dot**2, i_eff, di


def potential_energy(params: BodyParams, theta_a):
    return 0.5 * params.stiffness * np.asarray(theta_a) ** 2


def drag_torque(params: BodyParams, theta_a: float, theta_a_dot: float) -> float:
    """Generalised quadratic fluid drag torque on the tail (opposes ``theta_a_dot``)."""
    return float(tail_integrals(params, theta_a, theta_a_dot)[0, 2])


def damping_torque(params: BodyParams, theta_a_dot):
    return -params.damping * np.asarray(theta_a_dot)


def load_report(params: BodyParams, state: BodyState) -> LoadReport:
    """Wire moment and its components for one tail state."""
    ts = TimeSeries.from_columns(
        [0.0],
        theta_a_rad=state.theta_a,
        theta_a_dot_rad_per_s=state.theta_a_dot,
        theta_a_ddot_rad_per_s2=state.theta_a_ddot,
    )
    row = inverse_dynamics(params, ts)
    return LoadReport(*(float(row[c][0]) for c in LOAD_CHANNELS))


LOAD_CHANNELS = (
    "M_wire_Nm",
    "T_wire_N",
    "M_elastic_Nm",
    "Q_drag_Nm",
    "Q_damp_Nm",
    "kinetic_energy_J",
    "potential_energy_J",
)


def inverse_dynamics(params: BodyParams, trajectory: TimeSeries) -> TimeSeries:
    """Wire moment needed to follow a prescribed attack-angle trajectory.

    ``trajectory`` must carry ``theta_a_rad``, ``theta_a_dot_rad_per_s`` and
    ``theta_a_ddot_rad_per_s2`` on a uniform grid (enforced by TimeSeries).
    Per sample::

        M_wire = I_eff*dd + 0.5*dI_eff/dtheta*d**2 + K_eq*theta_a - Q_drag - Q_damp
        T_wire = M_wire / d_wire
    """
    t = trajectory.t
    theta_a = trajectory["theta_a_rad"]
    rate = trajectory["theta_a_dot_rad_per_s"]
    accel = trajectory["theta_a_ddot_rad_per_s2"]
    over = np.abs(theta_a) >= math.pi
    if np.any(over):
        raise SimulationError("attack angle reaches pi", float(t[np.argmax(over)]))
    ints = tail_integrals(params, theta_a, rate)
    i_eff, di, q_drag = ints[:, 0], ints[:, 1], ints[:, 2]
    q_damp = damping_torque(params, rate)
    m_elastic = params.stiffness * theta_a
    m_wire = i_eff * accel + 0.5 * di * rate * rate + m_elastic - q_drag - q_damp
    out = TimeSeries.from_columns(
        t,
        M_wire_Nm=m_wire,
        T_wire_N=m_wire / params.wire_offset,
        M_elastic_Nm=m_elastic,
        Q_drag_Nm=q_drag,
        Q_damp_Nm=q_damp,
        kinetic_energy_J=0.5 * i_eff * rate * rate,
        potential_energy_J=potential_energy(params, theta_a),
    )
    out.check_finite()
    return out


def tail_trajectory(geom: MechanismGeometry, params: BodyParams, cmd: ModeCommand, t):
    """Mechanism-driven ``(theta1, theta2, theta3, theta_a, theta_a_dot)`` at times ``t``."""
    theta1, theta2, theta3, theta3_dot = reel_trajectory(geom, cmd, t)
    theta_a, theta_a_dot = attack_angle_from_reel(params, theta3, theta3_dot, geom.reel_radius)
    return theta1, theta2, theta3, np.atleast_1d(theta_a), np.atleast_1d(theta_a_dot)


def motor_load_profile(geom: MechanismGeometry, params: BodyParams, cmd: ModeCommand,
                       t_end: float, dt: float) -> TimeSeries:
    """Motor torques required to drive the tail with a mode command.

    The tail acceleration comes from central differences of the analytic
    attack-angle rate; the grid is padded by one step on each side so every
    output sample gets a centred difference.
    """
    t = uniform_grid(0.0, t_end, dt)
    t_ext = np.concatenate([[t[0] - dt], t, [t[-1] + dt]])
    theta1, theta2, theta3, theta_a, theta_a_dot = tail_trajectory(geom, params, cmd, t_ext)
    accel = (theta_a_dot[2:] - theta_a_dot[:-2]) / (2.0 * dt)
    inner = slice(1, -1)
    loads = inverse_dynamics(
        params,
        TimeSeries.from_columns(
            t,
            theta_a_rad=theta_a[inner],
            theta_a_dot_rad_per_s=theta_a_dot[inner],
            theta_a_ddot_rad_per_s2=accel,
        ),
    )
    tension = loads["T_wire_N"]
    tau1, tau2 = motor_torques_from_load(geom, theta1[inner], theta2[inner], theta3[inner], tension)
    return TimeSeries.from_columns(
        t,
        tau1_Nm=tau1,
        tau2_Nm=tau2,
        T_wire_N=tension,
        theta_a_rad=theta_a[inner],
        theta3_rad=theta3[inner],
        M_wire_Nm=loads["M_wire_Nm"],
    )
