import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from omnidrive.kinematics import (
    RobotGeometry,
    Twist,
    WheelSpeeds,
    forward_kinematics,
    inverse_kinematics,
    slip_residual,
)

speeds = st.floats(-2, 2, allow_nan=False)
twists = st.builds(Twist, speeds, speeds, speeds)
scalars = st.floats(-3, 3, allow_nan=False)


def wheel_matrix(geom):
    k = geom.Lx + geom.Ly
    return np.array([[1, 1, -k], [1, -1, k], [1, -1, -k], [1, 1, k]], dtype=float) / geom.r


@pytest.mark.parametrize(
    "twist, expected",
    [
        ((0.5, 0, 0), (5, 5, 5, 5)),
        ((0, 0, 0), (0, 0, 0, 0)),
        ((0, 0, 1.0), (-4.5, 4.5, -4.5, 4.5)),
    ],
)
def test_inverse_examples(geom, twist, expected):
    w = inverse_kinematics(geom, Twist(*twist))
    np.testing.assert_allclose(tuple(w), expected, rtol=0, atol=1e-12)


@pytest.mark.parametrize(
    "wheels, expected",
    [
        ((5, 5, 5, 5), (0.5, 0, 0)),
        ((0, 0, 0, 0), (0, 0, 0)),
        ((1, -1, -1, 1), (0, 0.1, 0)),
    ],
)
def test_forward_examples(geom, wheels, expected):
    t = forward_kinematics(geom, WheelSpeeds(*wheels))
    np.testing.assert_allclose(tuple(t), expected, rtol=0, atol=1e-15)


def test_forward_matches_numpy_pseudoinverse(geom, rng):
    pinv = np.linalg.pinv(wheel_matrix(geom))
    for _ in range(50):
        w = rng.uniform(-10, 10, 4)
        np.testing.assert_allclose(forward_kinematics(geom, WheelSpeeds(*w)).as_array(), pinv @ w, atol=1e-12)


def test_slip_residual_brute_force_projection(geom, rng):
    M = wheel_matrix(geom)
    for w in [np.array([1.0, 1.0, -1.0, -1.0])] + [rng.uniform(-5, 5, 4) for _ in range(20)]:
        coef, *_ = np.linalg.lstsq(M, w, rcond=None)
        expected = np.linalg.norm(w - M @ coef)
        assert slip_residual(geom, WheelSpeeds(*w)) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("geometry", [(0.1, 0.2, 0.25), (0.05, 0.3, 0.1), (1.0, 1.0, 1.0)])
def test_slip_residual_of_twisted_pair_is_two(geometry):
    assert slip_residual(RobotGeometry(*geometry), WheelSpeeds(1, 1, -1, -1)) == pytest.approx(2.0, abs=1e-12)


def test_slip_residual_zero(geom):
    assert slip_residual(geom, WheelSpeeds()) == 0.0


@given(twists)
def test_round_trip(t):
    geom = RobotGeometry(0.1, 0.2, 0.25)
    back = forward_kinematics(geom, inverse_kinematics(geom, t))
    np.testing.assert_allclose(back.as_array(), t.as_array(), rtol=1e-12, atol=1e-12)
    assert slip_residual(geom, inverse_kinematics(geom, t)) <= 1e-12


@given(twists, twists, scalars, scalars)
def test_linearity(t1, t2, alpha, beta):
    geom = RobotGeometry(0.1, 0.2, 0.25)
    lhs = inverse_kinematics(geom, alpha * t1 + beta * t2).as_array()
    rhs = alpha * inverse_kinematics(geom, t1).as_array() + beta * inverse_kinematics(geom, t2).as_array()
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * max(1.0, np.abs(rhs).max()))


@given(twists)
def test_sign_symmetry(t):
    geom = RobotGeometry(0.1, 0.2, 0.25)
    assert tuple(inverse_kinematics(geom, -t)) == tuple(-w for w in inverse_kinematics(geom, t))


@pytest.mark.parametrize("bad", [float("nan"), float("inf")])
def test_rejects_non_finite(geom, bad):
    with pytest.raises(ValueError):
        Twist(bad, 0, 0)
    with pytest.raises(ValueError):
        WheelSpeeds(0, bad, 0, 0)


@pytest.mark.parametrize("args", [(0, 0.2, 0.2), (0.1, -1, 0.2), (0.1, 0.2, float("nan"))])
def test_geometry_validation(args):
    with pytest.raises(ValueError):
        RobotGeometry(*args)


def test_matrix_agrees_with_rows(geom, rng):
    t = Twist(*rng.uniform(-1, 1, 3))
    np.testing.assert_allclose(geom.matrix() @ t.as_array(), inverse_kinematics(geom, t).as_array(), atol=1e-12)
