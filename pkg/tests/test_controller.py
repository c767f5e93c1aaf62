import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omnidrive.controller import (
    LIGHTWEIGHT,
    PHYSICAL,
    DriveController,
    begin_command,
    delta_omega_bound,
    initial_state,
    interpolated_twist,
    progress,
    wheel_setpoints,
)
from omnidrive.kinematics import RobotGeometry, Twist, inverse_kinematics
from omnidrive.scurve import evaluate, saturation_time
from omnidrive.synthetic import SyntheticTruthSpec

GEOM = RobotGeometry(0.1, 0.2, 0.25)
TRUTH = SyntheticTruthSpec()
comp = st.floats(-1.5, 1.5, allow_nan=False)
twists = st.builds(Twist, comp, comp, comp)


def started(target, start=Twist(), model=TRUTH, mode=LIGHTWEIGHT, t0=0.0):
    return begin_command(initial_state(mode, start, t0), target, t0, GEOM, model)


def test_bound_examples():
    assert delta_omega_bound(GEOM, Twist(), Twist(0.35, 0, 0)) == pytest.approx(3.5, abs=1e-9)
    assert delta_omega_bound(GEOM, Twist(0.2, -0.1, 0.3), Twist(0.2, -0.1, 0.3)) == 0.0
    expected = math.sqrt((0.3 + 0.5 * 0.25) ** 2 + (0.15 + 0.5 * 0.2) ** 2) / 0.1
    assert delta_omega_bound(GEOM, Twist(), Twist(0.3, 0.15, 0.5)) == pytest.approx(expected, abs=1e-9)
    assert expected == pytest.approx(4.9310, abs=5e-4)


@given(twists, twists)
def test_bound_depends_only_on_change(a, b):
    shift = Twist(0.3, -0.2, 0.1)
    assert delta_omega_bound(GEOM, a, b) == pytest.approx(delta_omega_bound(GEOM, a + shift, b + shift), abs=1e-12)
    assert delta_omega_bound(GEOM, a, b) == pytest.approx(delta_omega_bound(GEOM, b, a), abs=1e-15)


@given(twists, twists)
def test_bound_covers_contact_point_speeds(a, b):
    # each axis bound dominates the speed change of every wheel contact point
    d = b - a
    bx = abs(d.vx) + abs(d.wz) * GEOM.Ly
    by = abs(d.vy) + abs(d.wz) * GEOM.Lx
    for sx in (1, -1):
        for sy in (1, -1):
            x, y = sx * GEOM.Lx, sy * GEOM.Ly
            assert abs(d.vx - d.wz * y) <= bx + 1e-12
            assert abs(d.vy + d.wz * x) <= by + 1e-12
    assert delta_omega_bound(GEOM, a, b) * GEOM.r == pytest.approx(math.hypot(bx, by), rel=1e-12)


def test_rest_to_rest_completes_immediately():
    s = started(Twist())
    assert s.params is None and s.delta_omega == 0.0
    assert progress(s, 0.0) == 1.0


def test_rest_to_forward_gets_fresh_curve():
    s = started(Twist(0.35, 0, 0))
    assert s.delta_omega == pytest.approx(3.5)
    assert s.params == TRUTH.curve(s.delta_omega)
    assert interpolated_twist(s, 0.0) == Twist()


def test_instantaneous_model():
    s = started(Twist(0.35, 0, 0), model=None)
    assert s.params is None and interpolated_twist(s, 0.0) == Twist(0.35, 0, 0)


def test_saturation_reaches_target_exactly():
    target = Twist(0.3, -0.2, 0.4)
    s = started(target)
    assert interpolated_twist(s, 1e3) == target


def test_midpoint_is_mean():
    start, target = Twist(0.1, 0.2, -0.3), Twist(0.5, -0.4, 0.7)
    s = started(target, start)
    lo, hi = 0.0, 10.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if evaluate(s.params, mid) < 0.5 * s.delta_omega else (lo, mid)
    got = interpolated_twist(s, hi).as_array()
    np.testing.assert_allclose(got, 0.5 * (start.as_array() + target.as_array()), atol=1e-9)


def test_preemption_chains_continuously():
    s1 = started(Twist(0.6, 0.1, 0.0))
    t_switch = 0.5 * saturation_time(s1.params)
    before = interpolated_twist(s1, t_switch)
    s2 = begin_command(s1, Twist(-0.2, 0.4, 0.8), t_switch, GEOM, TRUTH)
    assert s2.T == before
    np.testing.assert_allclose(interpolated_twist(s2, t_switch).as_array(), before.as_array(), atol=1e-12)
    left = interpolated_twist(s1, t_switch - 1e-9).as_array()
    assert np.max(np.abs(left - before.as_array())) < 1e-6
    assert s2.delta_omega == pytest.approx(delta_omega_bound(GEOM, before, s2.T_target))


def test_begin_rejects_time_travel():
    s = started(Twist(0.3, 0, 0), t0=2.0)
    with pytest.raises(ValueError):
        begin_command(s, Twist(), 1.0, GEOM, TRUTH)
    with pytest.raises(ValueError):
        interpolated_twist(s, 1.0)


@given(twists, twists, st.floats(0, 5))
@settings(max_examples=200)
def test_proportional_and_bounded(start, target, t):
    s = started(target, start)
    p = progress(s, t)
    assert 0.0 <= p <= 1.0
    now = interpolated_twist(s, t).as_array()
    a, b = start.as_array(), target.as_array()
    np.testing.assert_allclose(now - a, p * (b - a), atol=1e-12)
    assert np.all(now >= np.minimum(a, b)) and np.all(now <= np.maximum(a, b))


@given(twists, twists)
@settings(max_examples=50)
def test_progress_monotone(start, target):
    s = started(target, start)
    ps = [progress(s, t) for t in np.linspace(0, 5, 400)]
    assert np.all(np.diff(ps) >= 0)


def test_wheel_deltas_scale_together():
    s = started(Twist(0.4, 0.2, 0.5), mode=PHYSICAL)
    full = inverse_kinematics(GEOM, s.T_target).as_array()
    for t in (0.1, 0.3, 0.6, 1.0):
        w = wheel_setpoints(s, t, GEOM).as_array()
        np.testing.assert_allclose(w, progress(s, t) * full, atol=1e-12)


def test_wheel_setpoint_examples():
    s = started(Twist(0.35, 0, 0), mode=PHYSICAL)
    assert tuple(wheel_setpoints(s, 0.0, GEOM)) == (0, 0, 0, 0)
    mid = tuple(wheel_setpoints(s, 0.4, GEOM))
    assert mid[0] > 0 and all(w == pytest.approx(mid[0], abs=1e-12) for w in mid)
    assert wheel_setpoints(s, 1e3, GEOM) == inverse_kinematics(GEOM, Twist(0.35, 0, 0))


def test_wheel_setpoints_rejected_in_lightweight_mode():
    with pytest.raises(ValueError):
        wheel_setpoints(started(Twist(0.35, 0, 0)), 0.1, GEOM)


def test_drive_controller_wrapper():
    c = DriveController(GEOM, TRUTH, PHYSICAL)
    c.command(Twist(0.35, 0, 0), 0.0)
    assert c.twist(0.0) == Twist()
    assert c.wheels(100.0) == inverse_kinematics(GEOM, Twist(0.35, 0, 0))
