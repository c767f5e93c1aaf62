"""Mecanum base geometry and the linear maps between base twists and wheel speeds.

Wheels are indexed 1..4 in the row order of the wheel-velocity matrix::

    w1 = (vx + vy - (Lx + Ly) wz) / r
    w2 = (vx - vy + (Lx + Ly) wz) / r
    w3 = (vx - vy - (Lx + Ly) wz) / r
    w4 = (vx + vy + (Lx + Ly) wz) / r

Which physical corner carries which index is a property of the robot and is
not fixed here; recordings declare their own column mapping.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np


def _check_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} has a non-finite component: {values}")


@dataclass(frozen=True)
class RobotGeometry:
    """Wheel radius ``r`` and center-to-wheel offsets ``Lx``, ``Ly`` (all metres)."""

    r: float
    Lx: float
    Ly: float

    def __post_init__(self):
        for name in ("r", "Lx", "Ly"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"geometry {name} must be positive and finite, got {v}")

    @property
    def l_sum(self) -> float:
        return self.Lx + self.Ly

    def matrix(self) -> np.ndarray:
        """The 4x3 twist-to-wheel-speed matrix (including the 1/r factor)."""
        k = self.l_sum
        return np.array(
            [[1.0, 1.0, -k], [1.0, -1.0, k], [1.0, -1.0, -k], [1.0, 1.0, k]]
        ) / self.r


@dataclass(frozen=True)
class Twist:
    vx: float = 0.0
    vy: float = 0.0
    wz: float = 0.0

    def __post_init__(self):
        _check_finite("twist", self.vx, self.vy, self.wz)

    def __iter__(self) -> Iterator[float]:
        yield self.vx
        yield self.vy
        yield self.wz

    def as_array(self) -> np.ndarray:
        return np.array([self.vx, self.vy, self.wz])

    @classmethod
    def from_array(cls, a) -> "Twist":
        vx, vy, wz = (float(x) for x in a)
        return cls(vx, vy, wz)

    def __add__(self, other: "Twist") -> "Twist":
        return Twist(self.vx + other.vx, self.vy + other.vy, self.wz + other.wz)

    def __sub__(self, other: "Twist") -> "Twist":
        return Twist(self.vx - other.vx, self.vy - other.vy, self.wz - other.wz)

    def __mul__(self, s: float) -> "Twist":
        return Twist(self.vx * s, self.vy * s, self.wz * s)

    __rmul__ = __mul__

    def __neg__(self) -> "Twist":
        return Twist(-self.vx, -self.vy, -self.wz)


@dataclass(frozen=True)
class WheelSpeeds:
    w1: float = 0.0
    w2: float = 0.0
    w3: float = 0.0
    w4: float = 0.0

    def __post_init__(self):
        _check_finite("wheel speeds", self.w1, self.w2, self.w3, self.w4)

    def __iter__(self) -> Iterator[float]:
        yield self.w1
        yield self.w2
        yield self.w3
        yield self.w4

    def as_array(self) -> np.ndarray:
        return np.array([self.w1, self.w2, self.w3, self.w4])

    @classmethod
    def from_array(cls, a) -> "WheelSpeeds":
        w1, w2, w3, w4 = (float(x) for x in a)
        return cls(w1, w2, w3, w4)


def inverse_kinematics(geom: RobotGeometry, t: Twist) -> WheelSpeeds:
    """Wheel angular velocities [rad/s] that realise base twist ``t``."""
    vx, vy, wz = t
    _check_finite("twist", vx, vy, wz)
    k = geom.l_sum
    r = geom.r
    return WheelSpeeds(
        (vx + vy - k * wz) / r,
        (vx - vy + k * wz) / r,
        (vx - vy - k * wz) / r,
        (vx + vy + k * wz) / r,
    )


def forward_kinematics(geom: RobotGeometry, w: WheelSpeeds) -> Twist:
    """Least-squares base twist for the wheel speeds ``w``.

    Closed-form Moore-Penrose pseudoinverse of the wheel matrix; exact
    inverse of :func:`inverse_kinematics` on consistent wheel vectors.
    """
    w1, w2, w3, w4 = w
    _check_finite("wheel speeds", w1, w2, w3, w4)
    r = geom.r
    return Twist(
        r * (w1 + w2 + w3 + w4) / 4.0,
        r * (w1 - w2 - w3 + w4) / 4.0,
        r * (-w1 + w2 - w3 + w4) / (4.0 * geom.l_sum),
    )


def slip_residual(geom: RobotGeometry, w: WheelSpeeds) -> float:
    """Distance of ``w`` from the rank-3 subspace of kinematically consistent wheel speeds."""
    back = inverse_kinematics(geom, forward_kinematics(geom, w))
    return float(np.linalg.norm(w.as_array() - back.as_array()))
