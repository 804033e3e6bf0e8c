import math
from dataclasses import replace

import numpy as np
import pytest

from oracles import arc_jacobian, arc_point, drag_quad, inertia_quad

from finsim.body import (
    BodyParams,
    BodyState,
    attack_angle_from_reel,
    body_point,
    body_tangent,
    damping_torque,
    drag_torque,
    effective_inertia,
    inverse_dynamics,
    kinetic_energy,
    load_report,
    motor_load_profile,
    shape_jacobian,
)
from finsim.errors import SimulationError
from finsim.kernels import SERIES_EPS
from finsim.mechanism import MechanismGeometry, Mode, ModeCommand
from finsim.numerics import central_difference
from finsim.timeseries import TimeSeries, uniform_grid

BODY = BodyParams()
L = BODY.spine_length


def sine_trajectory(amp=0.8, f=1.0, dt=1e-3, t_end=1.0):
    t = uniform_grid(0.0, t_end, dt)
    w = 2 * math.pi * f
    return TimeSeries.from_columns(
        t,
        theta_a_rad=amp * np.sin(w * t),
        theta_a_dot_rad_per_s=amp * w * np.cos(w * t),
        theta_a_ddot_rad_per_s2=-amp * w * w * np.sin(w * t),
    )


class TestParams:
    @pytest.mark.parametrize("kw", [
        {"spine_length": 0.0}, {"wire_offset": -1.0}, {"stiffness": 0.0}, {"drag_coeff": -0.1},
        {"section_coms": (0.1, 0.2)}, {"section_coms": (0.1, 0.2, 0.3)}, {"n_grid": 100},
        {"diameter_tip": -0.5},
    ])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            BodyParams(**kw)

    def test_default_coms(self):
        assert BODY.section_coms == pytest.approx((L / 6, L / 2, 5 * L / 6))

    def test_state_bounds(self):
        with pytest.raises(ValueError):
            BodyState(math.pi)


class TestAttackAngle:
    def test_values(self):
        assert attack_angle_from_reel(BODY, 0.0, 0.0, 0.02) == (0.0, 0.0)
        assert attack_angle_from_reel(BODY, 0.5, 1.0, 0.02) == pytest.approx((1.0, 2.0))
        doubled = replace(BODY, wire_offset=0.02)
        assert attack_angle_from_reel(doubled, 0.5, 0.0, 0.02)[0] == pytest.approx(0.5)

    def test_rejects_full_circle(self):
        with pytest.raises(SimulationError):
            attack_angle_from_reel(BODY, 1.6, 0.0, 0.02)


class TestShape:
    def test_straight_limit(self):
        assert np.allclose(body_point(BODY, 0.0, L), [L, 0.0], atol=1e-15)

    def test_quarter_arc(self):
        b = replace(BODY, spine_length=0.2, section_coms=None)
        assert np.allclose(body_point(b, math.pi / 2, 0.2), [0.12732395, 0.12732395], atol=1e-8)

    def test_chord(self):
        rng = np.random.default_rng(1)
        for ta in rng.uniform(-3, 3, 50):
            p = body_point(BODY, ta, L)
            assert np.hypot(*p) == pytest.approx(abs(2 * (L / ta) * math.sin(ta / 2)), rel=1e-12)
            s = rng.uniform(0, L)
            assert np.hypot(*body_point(BODY, ta, s)) <= s + 1e-15

    def test_matches_closed_form_oracle(self):
        rng = np.random.default_rng(2)
        for ta, s in zip(rng.uniform(-3, 3, 100), rng.uniform(0, L, 100)):
            assert np.allclose(body_point(BODY, ta, s), arc_point(ta, s, L), atol=1e-14)

    def test_rejects_s_outside(self):
        with pytest.raises(ValueError):
            body_point(BODY, 0.1, L * 1.01)

    def test_jacobian_limits(self):
        j, _ = shape_jacobian(BODY, 0.0, 0.1)
        assert np.allclose(j, [0.0, 0.1**2 / (2 * L)], atol=1e-15)
        for ta in (-2.0, 0.0, 1e-3, 1.5):
            j, h = shape_jacobian(BODY, ta, 0.0)
            assert np.all(j == 0) and np.all(h == 0)

    def test_jacobian_oracle(self):
        rng = np.random.default_rng(4)
        for ta, s in zip(rng.uniform(-3, 3, 200), rng.uniform(0, L, 200)):
            j, _ = shape_jacobian(BODY, ta, s)
            ref = central_difference(lambda x: body_point(BODY, x, s), ta)
            assert np.all(np.abs(j - arc_jacobian(ta, s, L)) < 1e-10)
            assert np.all(np.abs(j - ref) <= np.maximum(1e-7, 1e-5 * np.abs(ref)))

    def test_second_derivative_oracle(self):
        rng = np.random.default_rng(6)
        for ta, s in zip(rng.uniform(-3, 3, 100), rng.uniform(0, L, 100)):
            _, d2 = shape_jacobian(BODY, ta, s)
            ref = central_difference(lambda x: arc_jacobian(x, s, L), ta)
            assert np.all(np.abs(d2 - ref) <= np.maximum(1e-7, 1e-5 * np.abs(ref)))

    def test_series_switchover_continuity(self):
        s = np.linspace(0, L, 11)
        for sign in (1, -1):
            for ta in np.linspace(SERIES_EPS / 2, 2 * SERIES_EPS, 41):
                lo = np.column_stack([*body_point(BODY, sign * ta * (1 - 1e-12), s), *np.vstack(shape_jacobian(BODY, sign * ta * (1 - 1e-12), s))])
                hi = np.column_stack([*body_point(BODY, sign * ta * (1 + 1e-12), s), *np.vstack(shape_jacobian(BODY, sign * ta * (1 + 1e-12), s))])
                assert np.max(np.abs(lo - hi)) < 1e-10

    def test_series_agrees_with_closed_form_at_switch(self):
        s = np.linspace(0, L, 11)
        for ta in (SERIES_EPS * 0.999999, SERIES_EPS * 1.000001):
            assert np.allclose(body_point(BODY, ta, s), np.array([arc_point(ta, x, L) for x in s]).T, atol=1e-13)

    def test_tangent(self):
        for ta in np.linspace(-3, 3, 25):
            tx, ty = body_tangent(BODY, ta, L)
            assert math.atan2(ty, tx) == pytest.approx(ta, abs=1e-12)


class TestEnergy:
    def test_inertia_quadrature_oracle(self):
        for ta in (-2.5, -0.3, 0.0, 0.02, 1.1, 2.8):
            i_eff, _ = effective_inertia(BODY, ta)
            ref = inertia_quad(ta, L, BODY.diameter, BODY.water_density, BODY.section_masses, BODY.section_coms)
            assert i_eff == pytest.approx(ref, rel=1e-6)

    def test_inertia_derivative(self):
        h = 1e-5
        for ta in (-2.0, -0.5, 0.01, 0.7, 2.5):
            _, di = effective_inertia(BODY, ta)
            fd = (effective_inertia(BODY, ta + h)[0] - effective_inertia(BODY, ta - h)[0]) / (2 * h)
            assert di == pytest.approx(fd, rel=1e-4, abs=1e-10)

    def test_zero_rate_and_massless(self):
        assert kinetic_energy(BODY, 0.5, 0.0)[0] == 0.0
        massless = replace(BODY, water_density=0.0, section_masses=(0.0, 0.0, 0.0))
        assert kinetic_energy(massless, 0.5, 3.0)[0] == 0.0


class TestDrag:
    def test_quadrature_oracle(self):
        for ta, w in ((0.0, 2.0), (0.7, -3.0), (-2.1, 5.0)):
            ref = drag_quad(ta, w, L, BODY.diameter, BODY.water_density, BODY.drag_coeff, BODY.fin_area)
            assert drag_torque(BODY, ta, w) == pytest.approx(ref, rel=1e-6)

    def test_properties(self):
        assert drag_torque(BODY, 0.4, 0.0) == 0.0
        assert drag_torque(BODY, 0.4, -2.0) == -drag_torque(BODY, 0.4, 2.0)
        assert drag_torque(BODY, 0.4, 4.0) == pytest.approx(4 * drag_torque(BODY, 0.4, 2.0), rel=1e-14)
        assert drag_torque(BODY, 0.4, 2.0) * 2.0 <= 0
        assert damping_torque(BODY, 2.0) * 2.0 <= 0


class TestInverseDynamics:
    def test_static_stiffness(self):
        rep = load_report(BODY, BodyState(1.0))
        assert rep.M_wire == pytest.approx(0.248, abs=1e-15)
        assert rep.M_elastic == 0.248
        assert rep.T_wire == pytest.approx(24.8)

    def test_zero_trajectory(self):
        t = uniform_grid(0, 0.1, 1e-3)
        z = np.zeros_like(t)
        out = inverse_dynamics(BODY, TimeSeries.from_columns(t, theta_a_rad=z, theta_a_dot_rad_per_s=z,
                                                            theta_a_ddot_rad_per_s2=z))
        assert np.all(out["M_wire_Nm"] == 0) and np.all(out["T_wire_N"] == 0)

    def test_energy_balance(self):
        out = inverse_dynamics(BODY, traj := sine_trajectory())
        rate = traj["theta_a_dot_rad_per_s"]
        power = (out["M_wire_Nm"] + out["Q_drag_Nm"] + out["Q_damp_Nm"]) * rate
        energy = out["kinetic_energy_J"] + out["potential_energy_J"]
        d_energy = np.gradient(energy, traj.dt)
        inner = slice(2, -2)
        err = np.sqrt(np.mean((power[inner] - d_energy[inner]) ** 2)) / np.sqrt(np.mean(d_energy[inner] ** 2))
        assert err < 0.01

    def test_mirror(self):
        traj = sine_trajectory(amp=1.1)
        neg = TimeSeries(traj.channels, np.column_stack([traj.t, -traj.data[:, 1:]]))
        a = inverse_dynamics(BODY, traj)["M_wire_Nm"]
        b = inverse_dynamics(BODY, neg)["M_wire_Nm"]
        assert np.array_equal(a, -b)

    def test_rejects_large_angle(self):
        t = uniform_grid(0, 0.002, 1e-3)
        bad = TimeSeries.from_columns(t, theta_a_rad=[0, 3.2, 0], theta_a_dot_rad_per_s=[0, 0, 0],
                                      theta_a_ddot_rad_per_s2=[0, 0, 0])
        with pytest.raises(SimulationError, match="t=0.001"):
            inverse_dynamics(BODY, bad)


class TestMotorLoad:
    GEOM = MechanismGeometry()

    def test_symmetric_peak_torque_band(self):
        loads = motor_load_profile(self.GEOM, BODY, ModeCommand(), 1.0, 1e-3)
        peak = max(np.abs(loads["tau1_Nm"]).max(), np.abs(loads["tau2_Nm"]).max())
        assert 0.4 <= peak <= 1.2

    def test_static_hold(self):
        cmd = ModeCommand(Mode.ASYMMETRIC, 0.0, -math.pi / 2)
        loads = motor_load_profile(self.GEOM, BODY, cmd, 0.01, 1e-3)
        ta = loads["theta_a_rad"][0]
        assert np.allclose(loads["T_wire_N"], BODY.stiffness * ta / BODY.wire_offset, rtol=1e-12)
        assert np.allclose(loads["tau1_Nm"], loads["tau1_Nm"][0])

    def test_asymmetric_sharing_differs(self):
        cmd = ModeCommand(Mode.ASYMMETRIC, 2 * math.pi, math.pi / 2)
        loads = motor_load_profile(self.GEOM, BODY, cmd, 1.0, 1e-3)
        assert np.max(np.abs(loads["tau1_Nm"] - loads["tau2_Nm"])) > 0.05
