"""Mecanum-drive modelling: wheel kinematics, learned S-curve velocity
profiles, twist interpolation, open-loop plant simulation and trajectory
error metrics."""

from .calibrator import (
    MlpWeights,
    ProfileRecording,
    TrainConfig,
    TrainingSample,
    extract_samples,
    gradient_check,
    loss,
    mlp_forward,
    predict_curve,
    train,
    train_all,
)
from .controller import (
    ControllerState,
    DriveController,
    begin_command,
    delta_omega_bound,
    initial_state,
    interpolated_twist,
    wheel_setpoints,
)
from .evaluation import ErrorReport, net_displacement, relative_error, summarize
from .kinematics import RobotGeometry, Twist, WheelSpeeds, forward_kinematics, inverse_kinematics, slip_residual
from .scurve import SCurveParams, construct_params, eval_gradient, evaluate, softplus_ramp
from .simulator import (
    CommandScript,
    OdometryTrace,
    Pose,
    SimConfig,
    integrate_step,
    run_script,
    steady_state_fraction,
)

__version__ = "0.1.0"

__all__ = [
    "CommandScript",
    "ControllerState",
    "DriveController",
    "ErrorReport",
    "MlpWeights",
    "OdometryTrace",
    "Pose",
    "ProfileRecording",
    "RobotGeometry",
    "SCurveParams",
    "SimConfig",
    "TrainConfig",
    "TrainingSample",
    "Twist",
    "WheelSpeeds",
    "begin_command",
    "construct_params",
    "delta_omega_bound",
    "eval_gradient",
    "evaluate",
    "extract_samples",
    "forward_kinematics",
    "gradient_check",
    "initial_state",
    "integrate_step",
    "interpolated_twist",
    "inverse_kinematics",
    "loss",
    "mlp_forward",
    "net_displacement",
    "predict_curve",
    "relative_error",
    "run_script",
    "slip_residual",
    "softplus_ramp",
    "steady_state_fraction",
    "summarize",
    "train",
    "train_all",
    "wheel_setpoints",
]
