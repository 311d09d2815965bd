"""Forward kinematics, geometric Jacobian, and Jdot*qdot."""

from __future__ import annotations

import numpy as np

from ..transforms import RigidTransform, rotation_about_axis
from .model import ArmModel, CartesianState


# tiny memo shared by the control and simulation paths, which evaluate the
# same configuration several times per tick
_FRAME_CACHE: dict = {}
_CACHE_LIMIT = 16


def _cached(cache: dict, key, compute):
    hit = cache.get(key)
    if hit is not None:
        return hit
    value = compute()
    if len(cache) >= _CACHE_LIMIT:
        cache.clear()
    cache[key] = value
    return value


def link_frames(model: ArmModel, q: np.ndarray) -> list[RigidTransform]:
    """Pose of every link frame in base coordinates (joint frames, after the
    joint rotation), plus the end-effector pose appended last."""
    q = model.check_q(q)
    key = (id(model), q.tobytes())
    return _cached(_FRAME_CACHE, key, lambda: _link_frames(model, q))


def _link_frames(model: ArmModel, q: np.ndarray) -> list[RigidTransform]:
    frames = []
    rot = np.eye(3)
    pos = np.zeros(3)
    for joint, angle in zip(model.joints, q):
        pos = rot @ joint.parent_transform.translation + pos
        rot = rot @ joint.parent_transform.rotation @ rotation_about_axis(joint.axis, angle)
        frames.append(RigidTransform._fast(rot, pos))
    frames.append(
        RigidTransform._fast(rot @ model.tool.rotation, rot @ model.tool.translation + pos)
    )
    return frames


def forward_kinematics(model: ArmModel, q: np.ndarray) -> CartesianState:
    """End-effector pose in the base frame."""
    return CartesianState(pose=link_frames(model, q)[-1])


def jacobian(model: ArmModel, q: np.ndarray) -> np.ndarray:
    """Geometric Jacobian, linear rows on top of angular rows, base frame."""
    q = model.check_q(q)
    key = (id(model), q.tobytes(), "jac")
    return _cached(_FRAME_CACHE, key, lambda: _jacobian(model, q))


def _jacobian(model: ArmModel, q: np.ndarray) -> np.ndarray:
    frames = link_frames(model, q)
    p_ee = frames[-1].translation
    cols = []
    for joint, frame in zip(model.joints, frames[:-1]):
        z = frame.rotation @ joint.axis
        o = frame.translation
        cols.append(np.concatenate([np.cross(z, p_ee - o), z]))
    return np.array(cols).T


def jdot_qdot(model: ArmModel, q: np.ndarray, qd: np.ndarray) -> np.ndarray:
    """Jdot(q) qd: end-effector acceleration at zero joint acceleration.

    Base-frame velocity/acceleration recursion along the chain; the linear
    part is the classical acceleration of the end-effector point."""
    q = model.check_q(q)
    qd = np.asarray(qd, dtype=float)
    frames = link_frames(model, q)
    origins = [f.translation for f in frames[:-1]] + [frames[-1].translation]
    axes = [f.rotation @ j.axis for f, j in zip(frames[:-1], model.joints)]

    omega = np.zeros(3)
    alpha = np.zeros(3)
    a = np.zeros(3)  # linear acceleration of the current frame origin
    for i in range(model.dof):
        # frame i origin is carried by link i-1
        if i > 0:
            d = origins[i] - origins[i - 1]
            a = a + np.cross(alpha, d) + np.cross(omega, np.cross(omega, d))
        alpha = alpha + np.cross(omega, axes[i]) * qd[i]
        omega = omega + axes[i] * qd[i]
    d = origins[-1] - origins[model.dof - 1]
    a = a + np.cross(alpha, d) + np.cross(omega, np.cross(omega, d))
    return np.concatenate([a, alpha])
