"""Kinematics and force transmission of the two-wheel crank-slider.

Frame and conventions
---------------------
Wheel 2 is centred at the origin, the reel at ``(L2, 0)`` and wheel 1 at
``(L1 + L2, 0)``. The wheel joints sit at angle ``theta_i`` on radius ``R_a``.
The reel joint sits diametrically opposite the reel angle::

    P3 = (L2 - R_b cos(theta3), -R_b sin(theta3))

With this convention the closed-form reel solution below satisfies the
three-joint collinearity exactly, and in symmetric mode
``sin(theta3) = -(R_a/R_b) sin(theta1)``. A positive ``theta3`` bends the tail
to port (left).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import SimulationError, TransmissionSingularity, UnreachableConfiguration
from .numerics import wrap_angle
from .timeseries import TimeSeries, uniform_grid

SINGULARITY_TOL = 1e-6
_DOMAIN_SLACK = 1e-12


@dataclass(frozen=True)
class MechanismGeometry:
    """Wheel radius, reel radius and the two wheel-to-reel offsets, all in metres."""

    wheel_radius: float = 0.010
    reel_radius: float = 0.020
    offset_l1: float = 0.015
    offset_l2: float = 0.120

    def __post_init__(self):
        for name in ("wheel_radius", "reel_radius", "offset_l1", "offset_l2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite (got {v!r})")
        if not self.wheel_radius < self.reel_radius:
            raise ValueError("invariant violated: wheel_radius < reel_radius")
        if not self.wheel_radius < min(self.offset_l1, self.offset_l2):
            raise ValueError("invariant violated: wheel_radius < min(offset_l1, offset_l2)")

    @property
    def span(self) -> float:
        return self.offset_l1 + self.offset_l2


class Mode(str, Enum):
    SYMMETRIC = "symmetric"
    ASYMMETRIC = "asymmetric"


@dataclass(frozen=True)
class ModeCommand:
    """Drive command: both wheels at ``omega`` (symmetric) or wheel 1 at ``omega``
    with wheel 2 held at ``theta2_hold`` (asymmetric)."""

    mode: Mode = Mode.SYMMETRIC
    omega: float = 2 * math.pi
    theta2_hold: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not math.isfinite(self.omega):
            raise ValueError("omega must be finite")
        if not -math.pi <= self.theta2_hold <= math.pi:
            raise ValueError("invariant violated: theta2_hold in [-pi, pi]")

    @property
    def frequency(self) -> float:
        return self.omega / (2 * math.pi)

    def wheel_angles(self, t):
        """Wheel angles and rates at times ``t`` (arrays)."""
        t = np.asarray(t, dtype=float)
        theta1 = self.omega * t
        if self.mode is Mode.SYMMETRIC:
            return theta1, theta1.copy(), np.full_like(t, self.omega), np.full_like(t, self.omega)
        return (
            theta1,
            np.full_like(t, self.theta2_hold),
            np.full_like(t, self.omega),
            np.zeros_like(t),
        )


@dataclass(frozen=True)
class MechanismState:
    theta1: float
    theta2: float
    theta1_dot: float
    theta2_dot: float
    theta3: float
    theta3_dot: float
    theta_rod: float
    d1: float
    d2: float


def reel_coefficients(geom: MechanismGeometry, theta1, theta2):
    """Coefficients ``(A, B, C)`` of ``A sin(theta3) + B cos(theta3) = C``."""
    ra, rb = geom.wheel_radius, geom.reel_radius
    s1, c1 = np.sin(theta1), np.cos(theta1)
    s2, c2 = np.sin(theta2), np.cos(theta2)
    a = ra * rb * (c1 - c2) + rb * geom.span
    b = ra * rb * (s2 - s1)
    c = ra * ra * np.sin(np.subtract(theta1, theta2)) - ra * (s1 * geom.offset_l2 + s2 * geom.offset_l1)
    return a, b, c


def solve_reel_angle(geom: MechanismGeometry, theta1, theta2, previous=None):
    """Reel angle for the given wheel angles (scalars or arrays).

    Uses the principal arcsin branch. When ``previous`` is given and the
    principal solution jumps by more than pi/2 from it, the mirrored branch is
    taken instead so the reel moves continuously.
    """
    a, b, c = reel_coefficients(geom, theta1, theta2)
    ratio = c / np.hypot(a, b)
    bad = np.abs(ratio) > 1.0 + _DOMAIN_SLACK
    if np.any(bad):
        i = int(np.argmax(bad)) if np.ndim(bad) else 0
        t1 = np.broadcast_to(theta1, np.shape(ratio)).flat[i] if np.ndim(ratio) else theta1
        t2 = np.broadcast_to(theta2, np.shape(ratio)).flat[i] if np.ndim(ratio) else theta2
        r = np.asarray(ratio).flat[i]
        raise UnreachableConfiguration(float(t1), float(t2), float(r))
    asin = np.arcsin(np.clip(ratio, -1.0, 1.0))
    phase = np.arctan2(b, a)
    theta3 = asin - phase
    if previous is not None:
        mirrored = math.pi - asin - phase
        jump = np.abs(wrap_angle(theta3 - previous))
        theta3 = np.where(jump > math.pi / 2, wrap_angle(mirrored), theta3)
    if np.ndim(theta3) == 0:
        return float(theta3)
    return theta3


def joint_positions(geom: MechanismGeometry, theta1, theta2, theta3):
    """Positions ``(P1, P2, P3)`` of the wheel-1, wheel-2 and reel joints, each ``(x, y)``."""
    ra, rb = geom.wheel_radius, geom.reel_radius
    p1 = (geom.span + ra * np.cos(theta1), ra * np.sin(theta1))
    p2 = (ra * np.cos(theta2), ra * np.sin(theta2))
    p3 = (geom.offset_l2 - rb * np.cos(theta3), -rb * np.sin(theta3))
    return p1, p2, p3


def collinearity_residual(geom: MechanismGeometry, theta1, theta2, theta3):
    """Cross product (P1 - P2) x (P3 - P2), normalised by (L1 + L2)^2."""
    p1, p2, p3 = joint_positions(geom, theta1, theta2, theta3)
    ax, ay = p1[0] - p2[0], p1[1] - p2[1]
    bx, by = p3[0] - p2[0], p3[1] - p2[1]
    return (ax * by - ay * bx) / geom.span**2


def rod_orientation(geom: MechanismGeometry, theta1, theta2):
    """Direction angle of the rod, measured from wheel joint 2 towards wheel joint 1."""
    ra = geom.wheel_radius
    dy = ra * (np.sin(theta1) - np.sin(theta2))
    dx = geom.span + ra * (np.cos(theta1) - np.cos(theta2))
    if np.any((dx == 0) & (dy == 0)):
        raise SimulationError("degenerate rod: wheel joints coincide")
    out = np.arctan2(dy, dx)
    return float(out) if np.ndim(out) == 0 else out


def _rod_frame(geom, theta1, theta2, theta3):
    """Rod angle and signed along-rod coordinates of the wheel joints relative to P3."""
    rod = rod_orientation(geom, theta1, theta2)
    e = (np.cos(rod), np.sin(rod))
    p1, p2, p3 = joint_positions(geom, theta1, theta2, theta3)
    lam1 = (p1[0] - p3[0]) * e[0] + (p1[1] - p3[1]) * e[1]
    lam2 = (p2[0] - p3[0]) * e[0] + (p2[1] - p3[1]) * e[1]
    return rod, lam1, lam2


def reel_sensitivities(geom: MechanismGeometry, theta1, theta2, theta3):
    """Partial derivatives ``(d theta3/d theta1, d theta3/d theta2)`` of the reel angle.

    The rod is pinned at the reel joint and the wheel joints slide in its
    slots, so normal velocities along the rod are linear in the along-rod
    coordinate. Raises :class:`TransmissionSingularity` when the rod is
    (nearly) normal to the reel crank.
    """
    rod, lam1, lam2 = _rod_frame(geom, theta1, theta2, theta3)
    c3 = np.cos(np.subtract(theta3, rod))
    if np.any(np.abs(c3) < SINGULARITY_TOL):
        raise TransmissionSingularity("transmission singularity: rod normal to reel crank")
    ra, rb = geom.wheel_radius, geom.reel_radius
    span = lam1 - lam2
    # normal velocity of P3 = (v1n * (-lam2) + v2n * lam1) / (lam1 - lam2)
    # and equals -R_b cos(theta3 - rod) * theta3_dot
    k1 = -ra * np.cos(np.subtract(theta1, rod)) * (-lam2) / (span * rb * c3)
    k2 = -ra * np.cos(np.subtract(theta2, rod)) * lam1 / (span * rb * c3)
    return k1, k2


def reel_velocity(geom: MechanismGeometry, theta1, theta2, theta3, theta1_dot, theta2_dot):
    """Reel angular rate from the wheel rates (rigid-rod velocity transfer)."""
    k1, k2 = reel_sensitivities(geom, theta1, theta2, theta3)
    out = k1 * theta1_dot + k2 * theta2_dot
    return float(out) if np.ndim(out) == 0 else out


def mechanism_state(geom, theta1, theta2, theta1_dot, theta2_dot, previous_theta3=None) -> MechanismState:
    theta3 = solve_reel_angle(geom, theta1, theta2, previous_theta3)
    rod, lam1, lam2 = _rod_frame(geom, theta1, theta2, theta3)
    theta3_dot = reel_velocity(geom, theta1, theta2, theta3, theta1_dot, theta2_dot)
    return MechanismState(
        theta1=float(theta1),
        theta2=float(theta2),
        theta1_dot=float(theta1_dot),
        theta2_dot=float(theta2_dot),
        theta3=float(theta3),
        theta3_dot=float(theta3_dot),
        theta_rod=float(rod),
        d1=float(abs(lam1)),
        d2=float(abs(lam2)),
    )


def reel_trajectory(geom: MechanismGeometry, cmd: ModeCommand, t):
    """``(theta1, theta2, theta3, theta3_dot)`` arrays for a mode command at times ``t``.

    Unreachable or singular samples are re-raised with their timestamp.
    """
    t = np.asarray(t, dtype=float)
    theta1, theta2, w1, w2 = cmd.wheel_angles(t)
    try:
        theta3 = np.atleast_1d(solve_reel_angle(geom, theta1, theta2))
    except UnreachableConfiguration as exc:
        i = int(np.argmax(np.abs(reel_ratio(geom, theta1, theta2)) > 1.0 + _DOMAIN_SLACK))
        raise UnreachableConfiguration(exc.theta1, exc.theta2, exc.ratio, float(t[i])) from None
    jumps = np.abs(wrap_angle(np.diff(theta3))) > math.pi / 2
    if np.any(jumps):
        theta3 = _enforce_continuity(geom, theta1, theta2, theta3)
    try:
        theta3_dot = np.atleast_1d(reel_velocity(geom, theta1, theta2, theta3, w1, w2))
    except TransmissionSingularity:
        rod = rod_orientation(geom, theta1, theta2)
        i = int(np.argmax(np.abs(np.cos(theta3 - rod)) < SINGULARITY_TOL))
        raise TransmissionSingularity("transmission singularity: rod normal to reel crank", float(t[i])) from None
    return theta1, theta2, theta3, theta3_dot


def _enforce_continuity(geom, theta1, theta2, theta3):
    out = theta3.copy()
    for k in range(1, len(out)):
        out[k] = solve_reel_angle(geom, theta1[k], theta2[k], previous=out[k - 1])
    return out


def reel_ratio(geom, theta1, theta2):
    a, b, c = reel_coefficients(geom, theta1, theta2)
    return c / np.hypot(a, b)


def generate_mode_trajectory(geom: MechanismGeometry, cmd: ModeCommand, t_end: float, dt: float) -> TimeSeries:
    """Sampled reel output for a symmetric or asymmetric drive command."""
    t = uniform_grid(0.0, t_end, dt)
    theta1, theta2, theta3, theta3_dot = reel_trajectory(geom, cmd, t)
    return TimeSeries.from_columns(
        t,
        theta1_rad=theta1,
        theta2_rad=theta2,
        theta3_rad=theta3,
        theta3_dot_rad_per_s=theta3_dot,
    )


def split_motor_torques(geom: MechanismGeometry, state: MechanismState, wire_tension: float, side: int = 1):
    """Motor torques ``(tau1, tau2)`` holding a wire load on the reel.

    ``wire_tension`` is the (non-negative) tension of the loaded wire of the
    antagonistic pair; ``side`` is +1 when it pulls towards positive reel
    angle and -1 otherwise. The split follows from virtual work on the ideal
    mechanism, ``tau_i = side * T * R_b * d theta3 / d theta_i``, which also
    satisfies the rod moment balance ``d1 tau1 / cos(theta1 - rod) =
    d2 tau2 / cos(theta2 - rod)`` and the normal-force balance
    ``tau1 / (R_a cos(theta1 - rod)) + tau2 / (R_a cos(theta2 - rod)) =
    -side * T / cos(theta3 - rod)``.
    """
    if wire_tension < 0:
        raise ValueError("wire tension must be non-negative (a wire cannot push)")
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    k1, k2 = reel_sensitivities(geom, state.theta1, state.theta2, state.theta3)
    load = side * wire_tension * geom.reel_radius
    return float(load * k1), float(load * k2)


def motor_torques_from_load(geom: MechanismGeometry, theta1, theta2, theta3, signed_tension):
    """Vectorised torque split for a signed net wire tension (sign selects the wire)."""
    k1, k2 = reel_sensitivities(geom, theta1, theta2, theta3)
    load = np.asarray(signed_tension) * geom.reel_radius
    return load * k1, load * k2

