"""Operational-space impedance law, normal-force regulator, and their sum.

The impedance part commands tau = J^T F_d + C qd + g with
F_d = M_x xdd_d - D edot - K e - M_x Jdot qd; stiffness and damping are
diagonal in the path frame and rotated into base coordinates. The force
part regulates the measured contact force along the surface normal with a
scalar PD law re-vectorized along -n (into the surface).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..dynamics.dynamics import bias_term, task_space_mass
from ..dynamics.kinematics import forward_kinematics, jacobian, jdot_qdot
from ..dynamics.model import ArmModel, JointState
from ..errors import InvalidInput
from ..geometry.path import PathFrame
from ..transforms import RigidTransform, rotation_log
from .gains import ControlGains
from .trajectory import MotionTarget

FORCE_FILTER_CUTOFF_HZ = 20.0


@dataclass
class ControlOutput:
    """Joint torque command plus per-tick diagnostics."""

    tau: np.ndarray
    e_x: np.ndarray = field(default_factory=lambda: np.zeros(6))
    f_normal: float = 0.0
    F_d: np.ndarray = field(default_factory=lambda: np.zeros(6))
    F_n: np.ndarray = field(default_factory=lambda: np.zeros(6))
    saturated: bool = False


def cartesian_error(current: RigidTransform, target: RigidTransform) -> np.ndarray:
    """e_x = x - x_d: translation difference stacked on the rotation vector
    of R R_d^T (zero iff the poses coincide)."""
    e_p = current.translation - target.translation
    e_r = rotation_log(current.rotation @ target.rotation.T)
    return np.concatenate([e_p, e_r])


def frame_weight(frame: PathFrame) -> np.ndarray:
    """Block-diagonal base-from-path-frame rotation [t | n | s] twice."""
    basis = np.column_stack([frame.t, frame.n, frame.s])
    w = np.zeros((6, 6))
    w[:3, :3] = basis
    w[3:, 3:] = basis
    return w


def impedance_torque(
    model: ArmModel,
    state: JointState,
    target: MotionTarget,
    gains: ControlGains,
    frame: PathFrame,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Operational-space impedance torque; returns (tau, F_d, e_x)."""
    q, qd = state.q, state.qd
    jac = jacobian(model, q)
    pose = forward_kinematics(model, q).pose
    e_x = cartesian_error(pose, target.pose)
    edot = jac @ qd - target.twist

    w = frame_weight(frame)
    k_world = w @ np.diag(gains.K_diag) @ w.T
    d_world = w @ np.diag(gains.D_diag) @ w.T

    mx = task_space_mass(model, q)
    f_d = mx @ target.accel - d_world @ edot - k_world @ e_x - mx @ jdot_qdot(model, q, qd)
    tau = jac.T @ f_d + bias_term(model, q, qd)
    # damp only the self-motion: projecting qd into the Jacobian null space
    # keeps the redundancy from drifting without dragging the task motion
    jjt = jac @ jac.T + 1e-8 * np.eye(6)
    qd_null = qd - jac.T @ np.linalg.solve(jjt, jac @ qd)
    tau = tau - gains.null_space_damping * qd_null
    if not np.all(np.isfinite(tau)):
        raise InvalidInput("impedance torque is not finite")
    return tau, f_d, e_x


@dataclass
class ForceEstimator:
    """Contact-wrench estimate from joint torque residuals.

    Least-squares solve of J^T F = tau_ext through a damped pseudo-inverse,
    then a first-order low-pass (20 Hz); keeps the last valid estimate when
    the arm is near-singular and flags it stale."""

    cutoff_hz: float = FORCE_FILTER_CUTOFF_HZ
    damping: float = 1e-6
    _filtered: np.ndarray = field(default_factory=lambda: np.zeros(6))
    _initialized: bool = False
    stale: bool = False

    def update(self, model: ArmModel, q: np.ndarray, tau_ext: np.ndarray, dt: float) -> np.ndarray:
        raw, ok = estimate_contact_force(model, q, tau_ext, damping=self.damping)
        if not ok:
            self.stale = True
            return self._filtered.copy()
        self.stale = False
        if not self._initialized:
            self._filtered = raw
            self._initialized = True
        else:
            alpha = dt / (dt + 1.0 / (2.0 * np.pi * self.cutoff_hz))
            self._filtered = self._filtered + alpha * (raw - self._filtered)
        return self._filtered.copy()

    def reset(self) -> None:
        self._filtered = np.zeros(6)
        self._initialized = False
        self.stale = False


def estimate_contact_force(
    model: ArmModel, q: np.ndarray, tau_ext: np.ndarray, damping: float = 1e-6
) -> tuple[np.ndarray, bool]:
    """Recover the end-effector wrench from tau_ext = J^T F.

    Returns (wrench, valid); valid is False near singularities, where the
    caller should keep its previous estimate."""
    jac = jacobian(model, q)
    sigma_min = np.linalg.svd(jac, compute_uv=False)[-1]
    if sigma_min < 1e-6:
        return np.zeros(6), False
    jjt = jac @ jac.T + (damping**2) * np.eye(6)
    wrench = np.linalg.solve(jjt, jac @ np.asarray(tau_ext, dtype=float))
    return wrench, True


@dataclass
class ForceLoopState:
    """Filtered-derivative memory for the normal-force PD loop."""

    cutoff_hz: float = FORCE_FILTER_CUTOFF_HZ
    _prev: float | None = None
    _fdot: float = 0.0

    def derivative(self, f_scalar: float, dt: float) -> float:
        if self._prev is None:
            self._prev = f_scalar
            return 0.0
        raw = (f_scalar - self._prev) / dt
        self._prev = f_scalar
        alpha = dt / (dt + 1.0 / (2.0 * np.pi * self.cutoff_hz))
        self._fdot += alpha * (raw - self._fdot)
        return self._fdot

    def reset(self) -> None:
        self._prev = None
        self._fdot = 0.0


def force_torque(
    model: ArmModel,
    state: JointState,
    measured_wrench: np.ndarray,
    frame: PathFrame,
    gains: ControlGains,
    loop_state: ForceLoopState | None = None,
    dt: float = 1e-3,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Normal-direction force regulator; returns (tau, F_n wrench, f.n).

    Scalar error e_f = f.n - f_n; u = -k_p e_f - k_d edot_f; the wrench is
    u along -n, i.e. positive u pushes into the surface."""
    n = frame.n
    f_scalar = float(np.asarray(measured_wrench, dtype=float)[:3] @ n)
    e_f = f_scalar - gains.f_n
    fdot = loop_state.derivative(f_scalar, dt) if loop_state is not None else 0.0
    u = -gains.k_p * e_f - gains.k_d * fdot
    f_n_wrench = np.concatenate([u * (-n), np.zeros(3)])
    tau = jacobian(model, state.q).T @ f_n_wrench
    return tau, f_n_wrench, f_scalar


def hybrid_torque(
    tau_impedance: np.ndarray,
    tau_force: np.ndarray,
    gains: ControlGains,
) -> tuple[np.ndarray, bool]:
    """Sum of the impedance and force torques, saturated per joint."""
    tau_impedance = np.asarray(tau_impedance, dtype=float)
    tau_force = np.asarray(tau_force, dtype=float)
    if tau_impedance.shape != tau_force.shape:
        raise InvalidInput("torque dimension mismatch")
    tau = tau_impedance + tau_force
    limit = gains.torque_limit
    saturated = bool(np.any(np.abs(tau) > limit))
    return np.clip(tau, -limit, limit), saturated


class HybridController:
    """One controller tick: impedance + force regulation + saturation.

    Owns the force-loop filter state; a single control-loop thread calls
    `tick` at the simulation rate."""

    def __init__(self, gains: ControlGains, dt: float = 1e-3):
        self.gains = gains
        self.dt = dt
        self.force_loop = ForceLoopState()
        self.estimator = ForceEstimator()

    def reset(self) -> None:
        self.force_loop.reset()
        self.estimator.reset()

    def tick(
        self,
        model: ArmModel,
        state: JointState,
        target: MotionTarget,
        frame: PathFrame,
        tau_ext_measured: np.ndarray,
        force_loop_active: bool = True,
        f_n_scale: float = 1.0,
    ) -> ControlOutput:
        """`f_n_scale` in [0, 1] ramps the force setpoint after the loop is
        enabled, so the tool engages the surface gently instead of slamming
        toward the full setpoint from zero measured force."""
        wrench = self.estimator.update(model, state.q, tau_ext_measured, self.dt)
        tau_imp, f_d, e_x = impedance_torque(model, state, target, self.gains, frame)
        if force_loop_active:
            gains = self.gains
            if f_n_scale < 1.0:
                gains = replace(gains, f_n=gains.f_n * max(f_n_scale, 0.0))
            tau_f, f_n_wrench, f_scalar = force_torque(
                model, state, wrench, frame, gains, self.force_loop, self.dt
            )
        else:
            tau_f = np.zeros_like(tau_imp)
            f_n_wrench = np.zeros(6)
            f_scalar = float(wrench[:3] @ frame.n)
        tau, saturated = hybrid_torque(tau_imp, tau_f, self.gains)
        return ControlOutput(
            tau=tau, e_x=e_x, f_normal=f_scalar, F_d=f_d, F_n=f_n_wrench, saturated=saturated
        )
