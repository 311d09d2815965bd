from .model import ArmModel, CartesianState, JointState, Link, RevoluteJoint, default_arm
from .kinematics import forward_kinematics, jacobian, jdot_qdot, link_frames
from .dynamics import (
    coriolis_term,
    gravity_term,
    inverse_dynamics,
    kinetic_energy,
    mass_matrix,
    potential_energy,
    step,
    task_space_mass,
)
from .ik import IKResult, solve_ik

__all__ = [
    "ArmModel",
    "CartesianState",
    "IKResult",
    "JointState",
    "Link",
    "RevoluteJoint",
    "coriolis_term",
    "default_arm",
    "forward_kinematics",
    "gravity_term",
    "inverse_dynamics",
    "jacobian",
    "jdot_qdot",
    "kinetic_energy",
    "link_frames",
    "mass_matrix",
    "potential_energy",
    "solve_ik",
    "step",
    "task_space_mass",
]
