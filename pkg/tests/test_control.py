import math

import numpy as np
import pytest

from finsim.body import BodyParams
from finsim.control import (
    ControllerConfig,
    HeadingSample,
    closed_loop_simulate,
    control_update,
    detect_mean_crossing,
    heading_error,
    step_metrics,
)
from finsim.mechanism import MechanismGeometry
from finsim.swim import SwimParams, SwimState
from finsim.timeseries import TimeSeries, uniform_grid

GEOM, BODY, SWIM = MechanismGeometry(), BodyParams(), SwimParams()


def theta_series(theta, t_end=5.0, dt=1e-3):
    t = uniform_grid(0.0, t_end, dt)
    return TimeSeries.from_columns(t, theta1_rad=theta(t))


class TestCrossings:
    def test_linear_phase(self):
        tc = detect_mean_crossing(theta_series(lambda t: 2 * math.pi * t))
        assert np.allclose(tc, [0, 1, 2, 3, 4, 5], atol=5e-4)

    def test_constant(self):
        assert detect_mean_crossing(theta_series(lambda t: np.full_like(t, 0.7))) == []

    def test_phase_shift(self):
        dt, w, phi = 1e-3, 2 * math.pi, 0.9
        tc = detect_mean_crossing(theta_series(lambda t: w * t + phi, dt=dt))
        expected = [(2 * math.pi * k - phi) / w for k in range(1, 6)]
        assert np.allclose(tc, expected[: len(tc)], atol=dt * dt * w / 8 + 1e-12)
        assert len(tc) == 5

    def test_reverse_rotation(self):
        tc = detect_mean_crossing(theta_series(lambda t: -2 * math.pi * t + 0.5))
        assert np.allclose(tc, [0.5 / (2 * math.pi) + k for k in range(5)], atol=1e-9)


class TestUpdate:
    def test_zero_error(self):
        cfg = ControllerConfig(psi_target=0.4)
        assert control_update(cfg, HeadingSample(0.0, 0.4)) == 0.0

    def test_proportional(self):
        assert control_update(ControllerConfig(psi_target=0.3), HeadingSample(0.0, 0.0)) == pytest.approx(0.3)

    def test_saturates(self):
        cfg = ControllerConfig(k_p=2.0, psi_target=3.0)
        assert control_update(cfg, HeadingSample(0.0, 0.0)) == pytest.approx(math.pi / 2)

    @pytest.mark.parametrize("delta", [0.1, -0.1])
    def test_shortest_path(self, delta):
        # target - heading = pi + delta is the same as delta - pi the short way round
        cfg = ControllerConfig(k_p=0.1, psi_target=math.pi / 2)
        psi = math.pi / 2 - math.pi - delta
        err = heading_error(cfg, psi)
        assert abs(err) <= math.pi
        assert err == pytest.approx(math.pi + delta if delta < 0 else delta - math.pi)

    def test_config_validation(self):
        for kw in ({"k_p": 0.0}, {"theta2_limit": 0.0}, {"theta2_limit": 4.0}, {"psi_target": -math.pi},
                   {"omega_cmd": 0.0}):
            with pytest.raises(ValueError):
                ControllerConfig(**kw)


class TestClosedLoop:
    def test_regulation_at_target(self):
        # only the start-up yaw of the first tail beat disturbs the heading
        res = closed_loop_simulate(GEOM, BODY, SWIM, ControllerConfig(psi_target=0.0), 10.0, 1e-3)
        assert np.max(np.abs(res.series["theta2_cmd_rad"])) < 0.15
        assert np.max(np.abs(res.series["psi_rad"])) < 0.15
        assert res.series["x_m"][-1] > 1.0

    def test_command_held_between_crossings(self):
        cfg = ControllerConfig(k_p=2.0, psi_target=2.0)
        res = closed_loop_simulate(GEOM, BODY, SWIM, cfg, 6.0, 1e-3)
        cmd = res.series["theta2_cmd_rad"]
        starts = {int(math.ceil(s.t_mean / 1e-3 - 1e-9)) for s in res.samples}
        changes = np.nonzero(np.diff(cmd))[0] + 1
        assert set(changes.tolist()) <= starts
        assert np.all(np.abs(cmd) <= cfg.theta2_limit)

    @pytest.mark.parametrize("err0", [0.5, -1.0, math.pi / 2])
    def test_error_shrinks(self, err0):
        cfg = ControllerConfig(psi_target=err0)
        res = closed_loop_simulate(GEOM, BODY, SWIM, cfg, 3.0, 1e-3)
        assert abs(res.series["heading_error_rad"][-1]) < abs(err0)

    @pytest.mark.parametrize("k_p", [0.5, 1.0, 2.0])
    def test_step_settles(self, k_p):
        cfg = ControllerConfig(k_p=k_p, psi_target=math.pi)
        res = closed_loop_simulate(GEOM, BODY, SWIM, cfg, 30.0, 1e-3)
        assert step_metrics(res, cfg).steady_state_error <= 0.15

    def test_initial_heading(self):
        cfg = ControllerConfig(psi_target=1.0)
        res = closed_loop_simulate(GEOM, BODY, SWIM, cfg, 2.0, 1e-3, initial=SwimState(psi=1.0))
        assert res.commands[0] == 0.0
