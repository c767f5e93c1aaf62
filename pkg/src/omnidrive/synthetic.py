"""Synthetic wheel-velocity recordings from a known curve family.

Stands in for encoder recordings of a real base: every wheel follows a
ground-truth S-curve scaled to its own target, sampled on a fixed grid,
perturbed with Gaussian noise and averaged over repeats.  The anchor values
below are illustrative constants, not properties of any particular robot.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .calibrator import ProfileRecording
from .formats import profile_filename, write_profile
from .kinematics import RobotGeometry, Twist, inverse_kinematics
from .scurve import SCurveParams, evaluate

# a and b shrink, k1 and k2 grow mildly with the velocity change
DEFAULT_ANCHOR_DW = (0.1, 2.0, 5.0, 10.0, 15.0)
DEFAULT_ANCHOR_A = (0.30, 0.27, 0.24, 0.20, 0.18)
DEFAULT_ANCHOR_B = (0.95, 0.85, 0.75, 0.65, 0.60)
DEFAULT_ANCHOR_K1 = (8.0, 9.0, 10.0, 12.0, 13.0)
DEFAULT_ANCHOR_K2 = (3.5, 3.8, 4.2, 4.8, 5.0)


@dataclass(frozen=True)
class SyntheticTruthSpec:
    """Ground-truth curve shapes at anchor velocity changes, interpolated linearly.

    Outside the anchor range the end values are held.  ``noise_sigma`` is the
    per-sample noise standard deviation as a fraction of each wheel's target.
    """

    anchor_dw: tuple[float, ...] = DEFAULT_ANCHOR_DW
    anchor_a: tuple[float, ...] = DEFAULT_ANCHOR_A
    anchor_b: tuple[float, ...] = DEFAULT_ANCHOR_B
    anchor_k1: tuple[float, ...] = DEFAULT_ANCHOR_K1
    anchor_k2: tuple[float, ...] = DEFAULT_ANCHOR_K2
    noise_sigma: float = 0.02
    repeats: int = 3

    def __post_init__(self):
        n = len(self.anchor_dw)
        if n < 1 or any(len(x) != n for x in (self.anchor_a, self.anchor_b, self.anchor_k1, self.anchor_k2)):
            raise ValueError("all anchor tuples must be non-empty and of equal length")
        if np.any(np.diff(self.anchor_dw) <= 0):
            raise ValueError("anchor velocity changes must be strictly increasing")
        if self.noise_sigma < 0 or self.repeats < 1:
            raise ValueError("noise_sigma must be >= 0 and repeats >= 1")
        for dw in self.anchor_dw:
            self.curve(dw)  # raises if an anchor is not a valid curve

    def curve(self, delta_omega: float) -> SCurveParams:
        def at(values):
            return float(np.interp(delta_omega, self.anchor_dw, values))

        return SCurveParams.from_shape(
            at(self.anchor_a), at(self.anchor_b), at(self.anchor_k1), at(self.anchor_k2), delta_omega
        )

    __call__ = curve

    def wheel_profile(self, target: float, t) -> np.ndarray:
        """Signed noise-free wheel speed for a from-rest step to ``target``."""
        t = np.asarray(t, dtype=float)
        mag = abs(float(target))
        if mag == 0:
            return np.zeros_like(t)
        return np.sign(target) * evaluate(self.curve(mag), t)


def default_commands(duration: float = 4.0, n: int = 20) -> list[tuple[Twist, float]]:
    """x, y and rotation from-rest steps over the grids used for calibration."""
    lin = np.linspace(0.05, 1.00, n)
    rot = np.linspace(0.05, 1.5, n)
    cmds = [(Twist(float(v), 0.0, 0.0), duration) for v in lin]
    cmds += [(Twist(0.0, float(v), 0.0), duration) for v in lin]
    cmds += [(Twist(0.0, 0.0, float(w)), duration) for w in rot]
    return cmds


def diagonal_commands(duration: float = 4.0, n: int = 20) -> list[tuple[Twist, float]]:
    """Equal-component x-y steps; used for evaluation only, never for training."""
    lin = np.linspace(0.05, 1.00, n)
    s = 1.0 / np.sqrt(2.0)
    return [(Twist(float(v * s), float(v * s), 0.0), duration) for v in lin]


def synth_recordings(
    spec: SyntheticTruthSpec,
    commands,
    geom: RobotGeometry,
    seed: int,
    dt: float = 1.0 / 60.0,
) -> list[ProfileRecording]:
    """One averaged recording per command; deterministic in ``seed``."""
    rng = np.random.default_rng(seed)
    out = []
    for twist, duration in commands:
        n = int(round(duration / dt)) + 1
        t = np.arange(n) * dt
        targets = inverse_kinematics(geom, twist).as_array()
        clean = np.stack([spec.wheel_profile(w, t) for w in targets], axis=1)
        scale = spec.noise_sigma * np.abs(targets)
        noise = rng.standard_normal((spec.repeats, n, 4)) * scale
        wheels = (clean[None] + noise).mean(axis=0)
        out.append(ProfileRecording(twist, float(duration), t, wheels, spec.repeats))
    return out


def gen_synthetic(
    spec: SyntheticTruthSpec,
    commands,
    geom: RobotGeometry,
    seed: int,
    out_dir,
    dt: float = 1.0 / 60.0,
) -> list[Path]:
    """Write one profile file per command into ``out_dir``; returns the paths."""
    out_dir = Path(out_dir)
    paths = []
    for rec in synth_recordings(spec, commands, geom, seed, dt):
        paths.append(write_profile(out_dir / profile_filename(rec.command, rec.duration), rec))
    return paths
