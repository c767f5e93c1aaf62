"""Open-loop planar plant driven through the twist controller.

Lightweight mode integrates the interpolated twist directly.  Physical mode
turns it into wheel setpoints, optionally passes them through a first-order
lag and Gaussian noise, and integrates the forward-kinematics twist of the
resulting wheel speeds.  The twist is held constant within each step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import controller as ctl
from .kinematics import RobotGeometry, Twist, WheelSpeeds, forward_kinematics, inverse_kinematics

DEFAULT_DT = {ctl.LIGHTWEIGHT: 1.0 / 60.0, ctl.PHYSICAL: 1.0 / 360.0}

TRACE_COLUMNS = ("t", "x", "y", "theta", "vx", "vy", "wz", "w1", "w2", "w3", "w4")


@dataclass(frozen=True)
class Pose:
    """World-frame position and accumulated (unwrapped) heading."""

    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.theta)):
            raise ValueError("pose components must be finite")


@dataclass
class SimConfig:
    mode: str = ctl.LIGHTWEIGHT
    dt: float | None = None  # None picks the per-mode default
    wheel_lag_tau: float = 0.0
    wheel_noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ctl.MODES:
            raise ValueError(f"mode must be one of {ctl.MODES}, got {self.mode!r}")
        if self.dt is None:
            self.dt = DEFAULT_DT[self.mode]
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.wheel_lag_tau < 0 or self.wheel_noise_sigma < 0:
            raise ValueError("wheel lag and noise must be non-negative")


@dataclass
class CommandScript:
    steps: list[tuple[float, Twist]] = field(default_factory=list)

    def __post_init__(self):
        self.steps = [(float(d), t) for d, t in self.steps]
        for d, _ in self.steps:
            if not d > 0:
                raise ValueError(f"command durations must be positive, got {d}")

    def __iter__(self):
        return iter(self.steps)

    def __len__(self):
        return len(self.steps)

    @property
    def duration(self) -> float:
        return sum(d for d, _ in self.steps)


@dataclass
class OdometryTrace:
    """Samples at ``t = k dt``; ``twist`` and ``wheels`` are the values applied
    over the step starting at each sample."""

    t: np.ndarray
    pose: np.ndarray  # (n, 3) x, y, theta
    twist: np.ndarray  # (n, 3) body-frame vx, vy, wz
    wheels: np.ndarray  # (n, 4)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        n = self.t.size
        self.pose = np.asarray(self.pose, dtype=float).reshape(n, 3)
        self.twist = np.asarray(self.twist, dtype=float).reshape(n, 3)
        self.wheels = np.asarray(self.wheels, dtype=float).reshape(n, 4)
        if n > 1 and np.any(np.diff(self.t) <= 0):
            raise ValueError("trace times must be strictly increasing")

    def __len__(self) -> int:
        return self.t.size

    def __iter__(self) -> Iterator[tuple[float, Pose, Twist, WheelSpeeds]]:
        for k in range(len(self)):
            yield (
                float(self.t[k]),
                Pose(*map(float, self.pose[k])),
                Twist.from_array(self.twist[k]),
                WheelSpeeds.from_array(self.wheels[k]),
            )

    def as_array(self) -> np.ndarray:
        """Rows in :data:`TRACE_COLUMNS` order."""
        return np.column_stack([self.t, self.pose, self.twist, self.wheels])

    @classmethod
    def from_array(cls, a) -> "OdometryTrace":
        a = np.asarray(a, dtype=float).reshape(-1, len(TRACE_COLUMNS))
        return cls(a[:, 0], a[:, 1:4], a[:, 4:7], a[:, 7:11])


def integrate_step(p: Pose, body: Twist, dt: float) -> Pose:
    """Exact pose update for a body twist held constant over ``dt``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    vx, vy, wz = body
    phi = wz * dt
    if abs(phi) < 1e-6:
        sin_c = dt * (1.0 - phi * phi / 6.0)  # sin(phi) / wz
        cos_c = dt * (phi / 2.0 - phi**3 / 24.0)  # (1 - cos(phi)) / wz
    else:
        sin_c = math.sin(phi) / wz
        cos_c = (1.0 - math.cos(phi)) / wz
    dx = vx * sin_c - vy * cos_c
    dy = vx * cos_c + vy * sin_c
    c, s = math.cos(p.theta), math.sin(p.theta)
    return Pose(p.x + c * dx - s * dy, p.y + s * dx + c * dy, p.theta + phi)


def _segment_starts(script: CommandScript, dt: float) -> tuple[list[int], int]:
    # boundaries snap to the step grid
    starts, k = [], 0
    for d, _ in script:
        starts.append(k)
        k += max(1, int(round(d / dt)))
    return starts, k


def run_script(
    script: CommandScript,
    geom: RobotGeometry,
    model: ctl.ProfileModel,
    cfg: SimConfig | None = None,
    initial_pose: Pose = Pose(),
) -> OdometryTrace:
    """Play ``script`` open-loop and record the odometry at every step.

    ``model=None`` makes every transition instantaneous.
    """
    cfg = cfg or SimConfig()
    dt = cfg.dt
    starts, n_steps = _segment_starts(script, dt)
    start_of = dict(zip(starts, (tw for _, tw in script)))
    rng = np.random.default_rng(cfg.seed)
    alpha = 1.0 if cfg.wheel_lag_tau == 0 else min(1.0, dt / cfg.wheel_lag_tau)

    state = ctl.initial_state(cfg.mode)
    pose = initial_pose
    actual = np.zeros(4)
    rows_t = np.arange(n_steps + 1) * dt
    poses = np.empty((n_steps + 1, 3))
    twists = np.empty((n_steps + 1, 3))
    wheels = np.empty((n_steps + 1, 4))

    for k in range(n_steps + 1):
        t = rows_t[k]
        if k in start_of:
            state = ctl.begin_command(state, start_of[k], t, geom, model)
        cmd = ctl.interpolated_twist(state, t)
        if cfg.mode == ctl.LIGHTWEIGHT:
            body = cmd
            w = inverse_kinematics(geom, cmd).as_array()
        else:
            setpoint = ctl.wheel_setpoints(state, t, geom).as_array()
            actual = setpoint if alpha == 1.0 else actual + alpha * (setpoint - actual)
            w = actual
            if cfg.wheel_noise_sigma > 0:
                w = actual + rng.normal(0.0, cfg.wheel_noise_sigma, 4)
            body = forward_kinematics(geom, WheelSpeeds.from_array(w))
        poses[k] = (pose.x, pose.y, pose.theta)
        twists[k] = body.as_array()
        wheels[k] = w
        if k < n_steps:
            pose = integrate_step(pose, body, dt)
    return OdometryTrace(rows_t, poses, twists, wheels)


def odometry_from_wheels(times, wheels, geom: RobotGeometry, initial_pose: Pose = Pose()) -> OdometryTrace:
    """Dead-reckon a trace from sampled wheel speeds (zero-order hold)."""
    times = np.asarray(times, dtype=float)
    wheels = np.asarray(wheels, dtype=float)
    n = times.size
    poses = np.empty((n, 3))
    twists = np.empty((n, 3))
    pose = initial_pose
    for k in range(n):
        body = forward_kinematics(geom, WheelSpeeds.from_array(wheels[k]))
        poses[k] = (pose.x, pose.y, pose.theta)
        twists[k] = body.as_array()
        if k + 1 < n:
            pose = integrate_step(pose, body, times[k + 1] - times[k])
    return OdometryTrace(times, poses, twists, wheels)


def steady_state_fraction(
    trace: OdometryTrace,
    target: Twist,
    t_start: float,
    t_end: float,
    tol: float = 0.01,
) -> float:
    """Fraction of samples in ``[t_start, t_end)`` whose twist is within ``tol``
    (relative to ``|target|``) of ``target``."""
    if not t_end > t_start:
        raise ValueError("command window must have positive duration")
    sel = (trace.t >= t_start - 1e-12) & (trace.t < t_end - 1e-12)
    if not np.any(sel):
        raise ValueError("trace does not cover the command window")
    goal = target.as_array()
    scale = float(np.linalg.norm(goal)) or 1.0
    err = np.linalg.norm(trace.twist[sel] - goal, axis=1)
    return float(np.mean(err <= tol * scale))


def compose_script(steps: Sequence[tuple[float, Sequence[float]]]) -> CommandScript:
    """Build a script from ``(duration, (vx, vy, wz))`` tuples."""
    return CommandScript([(d, Twist(*map(float, tw))) for d, tw in steps])


def square_script(speed: float = 0.45, leg: float = 3.0) -> CommandScript:
    """Forward, right, backward, left legs."""
    return compose_script(
        [(leg, (speed, 0, 0)), (leg, (0, -speed, 0)), (leg, (-speed, 0, 0)), (leg, (0, speed, 0))]
    )


def circle_script(lateral: float = 0.19, yaw_rate: float = 0.78, turns: float = 1.0) -> CommandScript:
    """Constant lateral velocity plus yaw rate for ``turns`` full periods."""
    return compose_script([(turns * 2 * math.pi / abs(yaw_rate), (0.0, lateral, yaw_rate))])
