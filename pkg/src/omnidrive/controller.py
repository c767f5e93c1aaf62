"""Twist interpolation along a learned S-curve.

When a new target twist arrives the controller bounds the wheel-speed change
it implies, asks the profile model for an S-curve with that saturation
value, and from then on reports ``T + p(t) (T' - T)`` with
``p(t) = S(t - t0) / delta_omega``.  Since every component moves by the same
fraction, wheel-speed changes stay proportional during the transition.

``model`` arguments accept a trained :class:`~omnidrive.calibrator.MlpWeights`,
any callable ``delta_omega -> SCurveParams`` (e.g. a synthetic truth family),
or ``None`` for instantaneous transitions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

from .kinematics import RobotGeometry, Twist, WheelSpeeds, inverse_kinematics
from .scurve import SCurveParams, evaluate

PHYSICAL = "physical"
LIGHTWEIGHT = "lightweight"
MODES = (PHYSICAL, LIGHTWEIGHT)

OMEGA_EPS = 1e-6  # rad/s; smaller changes complete immediately

ProfileModel = Union[Callable[[float], SCurveParams], None]


@dataclass(frozen=True)
class ControllerState:
    T: Twist
    T_target: Twist
    t0: float
    params: SCurveParams | None
    delta_omega: float
    mode: str = LIGHTWEIGHT

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.delta_omega < 0:
            raise ValueError("delta_omega must be non-negative")
        if (self.params is not None) != (self.delta_omega > 0):
            raise ValueError("S-curve parameters are required exactly when delta_omega > 0")


def initial_state(mode: str = LIGHTWEIGHT, twist: Twist = Twist(), t0: float = 0.0) -> ControllerState:
    """A settled controller holding ``twist``."""
    return ControllerState(twist, twist, float(t0), None, 0.0, mode)


def delta_omega_bound(geom: RobotGeometry, T: Twist, T_target: Twist) -> float:
    """Bound on the wheel angular-speed change of a transition [rad/s].

    Adds translational and rotational contact-point contributions per axis
    and divides the combined planar magnitude by the wheel radius.
    """
    dwz = abs(T_target.wz - T.wz)
    dvx = abs(T_target.vx - T.vx) + dwz * geom.Ly
    dvy = abs(T_target.vy - T.vy) + dwz * geom.Lx
    return math.hypot(dvx, dvy) / geom.r


def _curve(model: ProfileModel, delta_omega: float) -> SCurveParams | None:
    if model is None:
        return None
    predict = getattr(model, "predict_curve", model)
    return predict(delta_omega)


def begin_command(
    prev: ControllerState,
    T_target: Twist,
    t_now: float,
    geom: RobotGeometry,
    model: ProfileModel,
    omega_eps: float = OMEGA_EPS,
) -> ControllerState:
    """Start a transition from wherever ``prev`` is at ``t_now`` towards ``T_target``."""
    if t_now < prev.t0:
        raise ValueError(f"command time {t_now} precedes the running command start {prev.t0}")
    T = interpolated_twist(prev, t_now)
    dw = delta_omega_bound(geom, T, T_target)
    params = _curve(model, dw) if dw > omega_eps else None
    if params is None:
        dw = 0.0
    return ControllerState(T, T_target, float(t_now), params, dw, prev.mode)


def progress(s: ControllerState, t: float) -> float:
    """Executed fraction ``p_t`` of the running transition, clamped to [0, 1]."""
    if t < s.t0:
        raise ValueError(f"time {t} precedes the command start {s.t0}")
    if s.params is None:
        return 1.0
    p = evaluate(s.params, t - s.t0) / s.delta_omega
    return min(max(p, 0.0), 1.0)


def _lerp(x0: float, x1: float, p: float) -> float:
    if p >= 1.0:
        return x1
    v = x0 + p * (x1 - x0)
    lo, hi = (x0, x1) if x0 <= x1 else (x1, x0)
    return min(max(v, lo), hi)


def interpolated_twist(s: ControllerState, t: float) -> Twist:
    p = progress(s, t)
    return Twist(
        _lerp(s.T.vx, s.T_target.vx, p),
        _lerp(s.T.vy, s.T_target.vy, p),
        _lerp(s.T.wz, s.T_target.wz, p),
    )


def wheel_setpoints(s: ControllerState, t: float, geom: RobotGeometry) -> WheelSpeeds:
    """Wheel speed targets for the interpolated twist (physical mode only)."""
    if s.mode != PHYSICAL:
        raise ValueError("wheel setpoints are only produced in physical mode")
    return inverse_kinematics(geom, interpolated_twist(s, t))


class DriveController:
    """Mutable wrapper around :class:`ControllerState` for step-by-step use."""

    def __init__(self, geom: RobotGeometry, model: ProfileModel = None, mode: str = LIGHTWEIGHT,
                 t0: float = 0.0):
        self.geom = geom
        self.model = model
        self.state = initial_state(mode, t0=t0)

    def command(self, target: Twist, t: float) -> ControllerState:
        self.state = begin_command(self.state, target, t, self.geom, self.model)
        return self.state

    def twist(self, t: float) -> Twist:
        return interpolated_twist(self.state, t)

    def wheels(self, t: float) -> WheelSpeeds:
        return wheel_setpoints(self.state, t, self.geom)
