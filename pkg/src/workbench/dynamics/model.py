"""Kinematic and inertial description of the simulated serial arm."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInput
from ..transforms import RigidTransform


@dataclass(frozen=True)
class RevoluteJoint:
    """One revolute joint: rotation axis in its own frame, the fixed
    transform from the parent link frame to the joint frame, travel limits,
    and viscous friction."""

    axis: np.ndarray
    parent_transform: RigidTransform
    limit_lower: float = -2.967
    limit_upper: float = 2.967
    viscous_friction: float = 0.0

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        n = np.linalg.norm(axis)
        if n == 0:
            raise InvalidInput("joint axis must be nonzero")
        object.__setattr__(self, "axis", axis / n)
        if self.limit_lower >= self.limit_upper:
            raise InvalidInput("joint limits must satisfy lower < upper")
        if self.viscous_friction < 0:
            raise InvalidInput("viscous friction must be >= 0")


@dataclass(frozen=True)
class Link:
    """Rigid body attached to a joint frame: mass, center of mass, and the
    3x3 inertia tensor about the center of mass (link-frame coordinates)."""

    mass: float
    com: np.ndarray
    inertia: np.ndarray

    def __post_init__(self):
        if self.mass <= 0:
            raise InvalidInput("link mass must be positive")
        com = np.asarray(self.com, dtype=float)
        inertia = np.asarray(self.inertia, dtype=float)
        if inertia.shape != (3, 3) or not np.allclose(inertia, inertia.T, atol=1e-9):
            raise InvalidInput("inertia tensor must be symmetric 3x3")
        if np.any(np.linalg.eigvalsh(inertia) < 0):
            raise InvalidInput("inertia tensor must be positive (semi)definite")
        object.__setattr__(self, "com", com)
        object.__setattr__(self, "inertia", inertia)


@dataclass(frozen=True)
class ArmModel:
    """Serial chain of 1..7 revolute joints, one rigid link per joint."""

    joints: tuple
    links: tuple
    gravity: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -9.81]))
    tool: RigidTransform = field(default_factory=RigidTransform.identity)

    def __post_init__(self):
        joints = tuple(self.joints)
        links = tuple(self.links)
        if not 1 <= len(joints) <= 7:
            raise InvalidInput("joint count must be between 1 and 7")
        if len(links) != len(joints):
            raise InvalidInput("need exactly one link per joint")
        object.__setattr__(self, "joints", joints)
        object.__setattr__(self, "links", links)
        object.__setattr__(self, "gravity", np.asarray(self.gravity, dtype=float))

    @property
    def dof(self) -> int:
        return len(self.joints)

    def check_q(self, q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if q.shape != (self.dof,):
            raise InvalidInput(f"expected {self.dof} joint angles, got shape {q.shape}")
        if not np.all(np.isfinite(q)):
            raise InvalidInput("joint angles must be finite")
        return q


@dataclass
class JointState:
    """Joint angles and velocities of the simulated arm."""

    q: np.ndarray
    qd: np.ndarray

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float).copy()
        self.qd = np.asarray(self.qd, dtype=float).copy()
        if self.q.shape != self.qd.shape or self.q.ndim != 1:
            raise InvalidInput("q and qd must be 1D arrays of equal length")
        if not (np.all(np.isfinite(self.q)) and np.all(np.isfinite(self.qd))):
            raise InvalidInput("joint state must be finite")


@dataclass(frozen=True)
class CartesianState:
    """End-effector pose (base frame) and 6D twist (linear then angular)."""

    pose: RigidTransform
    twist: np.ndarray = field(default_factory=lambda: np.zeros(6))

    def __post_init__(self):
        object.__setattr__(self, "twist", np.asarray(self.twist, dtype=float))


def _cylinder_inertia(mass: float, radius: float, length: float) -> np.ndarray:
    ixx = mass * (3 * radius**2 + length**2) / 12.0
    izz = mass * radius**2 / 2.0
    return np.diag([ixx, ixx, izz])


def default_arm(viscous_friction: float = 0.05, gravity=(0.0, 0.0, -9.81)) -> ArmModel:
    """Generic 7-DOF chain with alternating z/y axes and iiwa-like link
    lengths (0.34, 0.40, 0.40, 0.126 m stack)."""
    axes = ["z", "y", "z", "y", "z", "y", "z"]
    offsets = [0.15, 0.19, 0.21, 0.19, 0.21, 0.19, 0.126]
    limits = [2.967, 2.094, 2.967, 2.094, 2.967, 2.094, 3.054]
    masses = [4.0, 4.0, 3.0, 3.0, 2.5, 1.8, 1.2]
    axis_map = {"z": np.array([0.0, 0.0, 1.0]), "y": np.array([0.0, 1.0, 0.0])}

    joints = []
    links = []
    for i in range(7):
        joints.append(
            RevoluteJoint(
                axis=axis_map[axes[i]],
                parent_transform=RigidTransform(np.eye(3), [0.0, 0.0, offsets[i]]),
                limit_lower=-limits[i],
                limit_upper=limits[i],
                viscous_friction=viscous_friction,
            )
        )
        next_len = offsets[i + 1] if i + 1 < 7 else 0.08
        links.append(
            Link(
                mass=masses[i],
                com=np.array([0.0, 0.0, next_len / 2.0]),
                inertia=_cylinder_inertia(masses[i], 0.05, max(next_len, 0.08)),
            )
        )
    return ArmModel(tuple(joints), tuple(links), gravity=np.asarray(gravity, dtype=float))
