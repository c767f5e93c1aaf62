"""Compare simulated commands against recorded ones, command by command."""
from __future__ import annotations

from typing import Iterable

from . import evaluation
from .calibrator import ProfileRecording
from .controller import ProfileModel
from .kinematics import RobotGeometry, Twist
from .simulator import CommandScript, OdometryTrace, SimConfig, odometry_from_wheels, run_script


def category_of(command: Twist) -> str:
    """Table row for a single command: ``x``, ``y``, ``x-y``, ``rotation`` or ``mixed``."""
    lin_x, lin_y, rot = command.vx != 0, command.vy != 0, command.wz != 0
    if rot:
        return "rotation" if not (lin_x or lin_y) else "mixed"
    if lin_x and lin_y:
        return "x-y"
    if lin_x:
        return "x"
    if lin_y:
        return "y"
    return "none"


def kind_of(category: str) -> str:
    return evaluation.ROTATION if category == "rotation" else evaluation.LINEAR


def reference_trace(rec: ProfileRecording, geom: RobotGeometry) -> OdometryTrace:
    """Dead-reckoned odometry of a recording's wheel speeds."""
    return odometry_from_wheels(rec.times, rec.wheels, geom)


def simulate_command(command: Twist, duration: float, geom: RobotGeometry, model: ProfileModel,
                     cfg: SimConfig) -> OdometryTrace:
    return run_script(CommandScript([(duration, command)]), geom, model, cfg)


def comparison_pairs(recordings: Iterable[ProfileRecording], geom: RobotGeometry, model: ProfileModel,
                     cfg: SimConfig):
    """``(real, sim, category, kind)`` tuples ready for :func:`evaluation.summarize`."""
    for rec in recordings:
        category = category_of(rec.command)
        if category in ("none", "mixed"):
            continue
        real = reference_trace(rec, geom)
        sim = simulate_command(rec.command, rec.duration, geom, model, cfg)
        yield real, sim, category, kind_of(category)


def error_report(recordings, geom, model, cfg) -> evaluation.ErrorReport:
    return evaluation.summarize(comparison_pairs(recordings, geom, model, cfg))
