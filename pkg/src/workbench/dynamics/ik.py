"""Damped-least-squares inverse kinematics for reachability checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..transforms import RigidTransform, rotation_log
from .kinematics import forward_kinematics, jacobian
from .model import ArmModel

MAX_ITERATIONS = 200
POSITION_TOLERANCE = 1e-3  # m
DLS_LAMBDA = 0.05


@dataclass(frozen=True)
class IKResult:
    q: np.ndarray
    converged: bool
    position_error: float
    iterations: int


def solve_ik(
    model: ArmModel,
    target: RigidTransform,
    q_seed: np.ndarray,
    orientation_weight: float = 0.5,
    respect_limits: bool = True,
) -> IKResult:
    """Iterate q += J^+ e with a damped pseudo-inverse until the position
    residual drops below 1 mm or the iteration budget runs out."""
    q = np.asarray(q_seed, dtype=float).copy()
    pos_err = np.inf
    for it in range(1, MAX_ITERATIONS + 1):
        pose = forward_kinematics(model, q).pose
        e_p = target.translation - pose.translation
        e_r = rotation_log(target.rotation @ pose.rotation.T)
        pos_err = float(np.linalg.norm(e_p))
        rot_err = float(np.linalg.norm(e_r))
        if pos_err < POSITION_TOLERANCE and rot_err < 1e-2:
            return IKResult(q, True, pos_err, it)
        err = np.concatenate([e_p, orientation_weight * e_r])
        jac = jacobian(model, q)
        jac = jac.copy()
        jac[3:, :] *= orientation_weight
        jjt = jac @ jac.T + (DLS_LAMBDA**2) * np.eye(6)
        dq = jac.T @ np.linalg.solve(jjt, err)
        step = np.linalg.norm(dq)
        if step > 0.5:
            dq *= 0.5 / step
        q = q + dq
        if respect_limits:
            lows = np.array([j.limit_lower for j in model.joints])
            highs = np.array([j.limit_upper for j in model.joints])
            q = np.clip(q, lows, highs)
    return IKResult(q, False, pos_err, MAX_ITERATIONS)
