import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from finsim.body import BodyParams, body_point, damping_torque, drag_torque, shape_jacobian
from finsim.config import DriveConfig, ScenarioConfig, format_config, parse_config
from finsim.control import ControllerConfig, HeadingSample, control_update, heading_error
from finsim.mechanism import MechanismGeometry, collinearity_residual, solve_reel_angle
from finsim.numerics import wrap_angle
from finsim.scenarios import emit_timeseries
from finsim.swim import SwimParams
from finsim.timeseries import TimeSeries, uniform_grid

angles = st.floats(-math.pi, math.pi, allow_nan=False)
BODY = BodyParams()


@st.composite
def geometries(draw):
    ra = draw(st.floats(0.002, 0.03))
    rb = draw(st.floats(ra * 1.05, 0.08))
    l1 = draw(st.floats(ra * 1.05, 0.3))
    l2 = draw(st.floats(ra * 1.05, 0.3))
    return MechanismGeometry(ra, rb, l1, l2)


@given(geometries(), angles, angles)
def test_collinearity_any_geometry(geom, t1, t2):
    t3 = solve_reel_angle(geom, t1, t2)
    assert abs(collinearity_residual(geom, t1, t2, t3)) < 1e-9


@given(geometries(), angles)
def test_symmetric_reduction_any_geometry(geom, t1):
    t3 = solve_reel_angle(geom, t1, t1)
    assert abs(math.sin(t3) + geom.wheel_radius / geom.reel_radius * math.sin(t1)) < 1e-9


@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_wrap_is_idempotent(a):
    w = wrap_angle(a)
    assert -math.pi < w <= math.pi
    assert wrap_angle(w) == w


@given(st.floats(-3.0, 3.0), st.floats(-50, 50))
def test_dissipative(theta_a, rate):
    assert drag_torque(BODY, theta_a, rate) * rate <= 0
    assert damping_torque(BODY, rate) * rate <= 0


@given(st.floats(-3.0, 3.0), st.floats(0.0, 1.0))
def test_arc_length_preserved(theta_a, frac):
    s = frac * BODY.spine_length
    h = 1e-6
    lo, hi = max(s - h, 0.0), min(s + h, BODY.spine_length)
    d = (body_point(BODY, theta_a, hi) - body_point(BODY, theta_a, lo)) / (hi - lo)
    assert abs(np.hypot(*d) - 1) < 1e-8


@given(st.floats(-3.0, 3.0), st.floats(0.0, 1.0))
def test_shape_mirror(theta_a, frac):
    s = frac * BODY.spine_length
    p, q = body_point(BODY, theta_a, s), body_point(BODY, -theta_a, s)
    assert p[0] == q[0] and p[1] == -q[1]
    j, _ = shape_jacobian(BODY, theta_a, s)
    k, _ = shape_jacobian(BODY, -theta_a, s)
    assert j[0] == -k[0] and j[1] == k[1]


@given(st.floats(0.01, 10), st.floats(0.1, math.pi), angles, st.floats(-50, 50, allow_nan=False))
def test_command_saturates(k_p, limit, target, psi):
    cfg = ControllerConfig(k_p=k_p, theta2_limit=limit, psi_target=wrap_angle(target))
    cmd = control_update(cfg, HeadingSample(0.0, psi))
    assert abs(cmd) <= limit
    assert abs(heading_error(cfg, psi)) <= math.pi


@settings(max_examples=40)
@given(
    st.floats(0.2, 5.0), st.floats(0.01, 0.5), st.floats(0.1, 10.0),
    st.sampled_from(["turn", "swim-forward", "heading-step"]), st.floats(-math.pi, math.pi),
)
def test_config_round_trip(mass, arm, k_p, name, hold):
    cfg = ScenarioConfig(name=name, swim=SwimParams(body_mass=mass, tail_moment_arm=arm),
                         controller=ControllerConfig(k_p=k_p), drive=DriveConfig(theta2_hold=hold))
    assert parse_config(format_config(cfg)) == cfg


@settings(max_examples=25)
@given(st.lists(st.floats(-1e9, 1e9, allow_nan=False), min_size=1, max_size=20))
def test_csv_nine_digits(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("csv") / "v.csv"
    ts = TimeSeries.from_columns(uniform_grid(0, 0.1 * (len(values) - 1), 0.1) if len(values) > 1 else [0.0],
                                 v=values)
    lines = emit_timeseries(ts, path).read_text().splitlines()
    back = [float(line.split(",")[1]) for line in lines[1:]]
    for a, b in zip(values, back):
        assert abs(a - b) <= 5e-9 * abs(a) + 1e-300
