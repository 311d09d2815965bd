from .gains import ControlGains, critically_damped
from .trajectory import MotionTarget, SpeedProfile, profile_duration, track_path
from .controller import (
    ControlOutput,
    ForceEstimator,
    HybridController,
    cartesian_error,
    estimate_contact_force,
    force_torque,
    hybrid_torque,
    impedance_torque,
)

__all__ = [
    "ControlGains",
    "ControlOutput",
    "ForceEstimator",
    "HybridController",
    "MotionTarget",
    "SpeedProfile",
    "cartesian_error",
    "critically_damped",
    "estimate_contact_force",
    "force_torque",
    "hybrid_torque",
    "impedance_torque",
    "profile_duration",
    "track_path",
]
