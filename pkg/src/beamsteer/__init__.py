"""Laser-spot steering with a stereo pair and an actuated mirror.

Point-to-point visual servoing through the vectorized trifocal
constraint, image-plane path following in chained form, and their
combination for 3D path following, all driven by a deterministic
closed-loop simulator.
"""

from .config import ScenarioConfig, emit_config, load_config, parse_config
from .errors import BeamsteerError
from .following import FollowGains, follow_step
from .geometry import CameraModel, FundamentalMatrix, Intrinsics, fundamental_between, project
from .hybrid import HybridController, transfer_path
from .optics import MirrorState, Plane, Sphere, observe_spot
from .paths import PathCurve, build_path, load_path_csv, project_onto_path
from .sim import ScenarioResult, metrics, perturb_calibration, run
from .trifocal import ServoGains, TrifocalRig, TrifocalServo, control_omega

__version__ = "0.1.0"

__all__ = [
    "BeamsteerError",
    "CameraModel",
    "FollowGains",
    "FundamentalMatrix",
    "HybridController",
    "Intrinsics",
    "MirrorState",
    "PathCurve",
    "Plane",
    "ScenarioConfig",
    "ScenarioResult",
    "ServoGains",
    "Sphere",
    "TrifocalRig",
    "TrifocalServo",
    "build_path",
    "control_omega",
    "emit_config",
    "follow_step",
    "fundamental_between",
    "load_config",
    "load_path_csv",
    "metrics",
    "observe_spot",
    "parse_config",
    "perturb_calibration",
    "project",
    "project_onto_path",
    "run",
    "transfer_path",
]
