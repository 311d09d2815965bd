"""Joint-space dynamics: recursive Newton-Euler, mass matrix, task-space
inertia, and the semi-implicit Euler simulation step."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInput, NearSingular
from ..transforms import rotation_about_axis
from .kinematics import _FRAME_CACHE, _cached, jacobian, link_frames
from .model import ArmModel, JointState

DT_MAX = 0.005
SINGULARITY_EIGEN_FLOOR = 1e-6
DAMPING_THRESHOLD = 1e-3
DAMPING_LAMBDA = 1e-3


def inverse_dynamics(
    model: ArmModel,
    q: np.ndarray,
    qd: np.ndarray,
    qdd: np.ndarray,
    with_gravity: bool = True,
) -> np.ndarray:
    """Recursive Newton-Euler: joint torques realizing (q, qd, qdd).

    Gravity enters through the standard base-acceleration trick. Viscous
    friction is not included here; `step` applies it separately.
    """
    q = model.check_q(q)
    qd = np.asarray(qd, dtype=float)
    qdd = np.asarray(qdd, dtype=float)
    n = model.dof

    # joint-to-joint rotations and offsets
    rots = []  # ^{i-1}R_i
    offs = []  # ^{i-1}p_i
    for joint, angle in zip(model.joints, q):
        rots.append(joint.parent_transform.rotation @ rotation_about_axis(joint.axis, angle))
        offs.append(joint.parent_transform.translation)

    omega = [np.zeros(3)] * n
    alpha = [np.zeros(3)] * n
    a_frame = [np.zeros(3)] * n
    a_com = [np.zeros(3)] * n

    w_prev = np.zeros(3)
    al_prev = np.zeros(3)
    ae_prev = -model.gravity if with_gravity else np.zeros(3)
    for i in range(n):
        rt = rots[i].T
        axis = model.joints[i].axis
        w_in = rt @ w_prev
        w = w_in + qd[i] * axis
        al = rt @ al_prev + qdd[i] * axis + np.cross(w_in, qd[i] * axis)
        ae = rt @ (
            ae_prev + np.cross(al_prev, offs[i]) + np.cross(w_prev, np.cross(w_prev, offs[i]))
        )
        c = model.links[i].com
        a_com[i] = ae + np.cross(al, c) + np.cross(w, np.cross(w, c))
        omega[i], alpha[i], a_frame[i] = w, al, ae
        w_prev, al_prev, ae_prev = w, al, ae

    tau = np.zeros(n)
    f_next = np.zeros(3)
    n_next = np.zeros(3)
    for i in range(n - 1, -1, -1):
        link = model.links[i]
        big_f = link.mass * a_com[i]
        big_n = link.inertia @ alpha[i] + np.cross(omega[i], link.inertia @ omega[i])
        if i + 1 < n:
            f_child = rots[i + 1] @ f_next
            n_child = rots[i + 1] @ n_next + np.cross(offs[i + 1], f_child)
        else:
            f_child = np.zeros(3)
            n_child = np.zeros(3)
        f_i = big_f + f_child
        n_i = big_n + np.cross(link.com, big_f) + n_child
        tau[i] = n_i @ model.joints[i].axis
        f_next, n_next = f_i, n_i
    return tau


def gravity_term(model: ArmModel, q: np.ndarray) -> np.ndarray:
    """g(q): torques holding the arm static against gravity."""
    z = np.zeros(model.dof)
    return inverse_dynamics(model, q, z, z, with_gravity=True)


def coriolis_term(model: ArmModel, q: np.ndarray, qd: np.ndarray) -> np.ndarray:
    """C(q, qd) qd: velocity-product torques (no gravity)."""
    return inverse_dynamics(model, q, qd, np.zeros(model.dof), with_gravity=False)


def bias_term(model: ArmModel, q: np.ndarray, qd: np.ndarray) -> np.ndarray:
    """C(q, qd) qd + g(q), memoized: the controller and the simulation step
    both need it at the same state every tick."""
    q = model.check_q(q)
    qd = np.asarray(qd, dtype=float)
    key = (id(model), q.tobytes(), qd.tobytes(), "bias")
    return _cached(
        _FRAME_CACHE,
        key,
        lambda: inverse_dynamics(model, q, qd, np.zeros(model.dof), with_gravity=True),
    )


def mass_matrix(model: ArmModel, q: np.ndarray) -> np.ndarray:
    """M(q), symmetric positive definite, via composite rigid bodies."""
    q = model.check_q(q)
    key = (id(model), q.tobytes(), "mass")
    return _cached(_FRAME_CACHE, key, lambda: _mass_matrix_crba(model, q))


def _mass_matrix_crba(model: ArmModel, q: np.ndarray) -> np.ndarray:
    """Composite-rigid-body algorithm in base coordinates."""
    n = model.dof
    frames = link_frames(model, q)
    axes = [f.rotation @ j.axis for f, j in zip(frames[:-1], model.joints)]
    origins = [f.translation for f in frames[:-1]]
    coms = [f.apply(link.com) for f, link in zip(frames[:-1], model.links)]
    inertias = [
        f.rotation @ link.inertia @ f.rotation.T for f, link in zip(frames[:-1], model.links)
    ]

    m = np.zeros((n, n))
    # composite body of links i..n-1, accumulated going backward
    comp_mass = 0.0
    comp_com = np.zeros(3)
    comp_inertia = np.zeros((3, 3))
    for i in range(n - 1, -1, -1):
        m_i = model.links[i].mass
        new_mass = comp_mass + m_i
        new_com = (comp_mass * comp_com + m_i * coms[i]) / new_mass
        inertia = np.zeros((3, 3))
        for part_mass, part_com, part_inertia in (
            (comp_mass, comp_com, comp_inertia),
            (m_i, coms[i], inertias[i]),
        ):
            if part_mass == 0.0:
                continue
            d = part_com - new_com
            inertia += part_inertia + part_mass * ((d @ d) * np.eye(3) - np.outer(d, d))
        comp_mass, comp_com, comp_inertia = new_mass, new_com, inertia

        # unit acceleration of joint i acting on the composite body
        force = comp_mass * np.cross(axes[i], comp_com - origins[i])
        torque_com = comp_inertia @ axes[i]
        for j in range(i + 1):
            m[j, i] = axes[j] @ (torque_com + np.cross(comp_com - origins[j], force))
            m[i, j] = m[j, i]
    return m


def task_space_mass(
    model: ArmModel, q: np.ndarray, selection: np.ndarray | None = None
) -> np.ndarray:
    """M_x = (S J M^-1 J^T S^T)^-1, the apparent end-effector inertia.

    `selection` (k x 6) restricts the task to k directions; arms with fewer
    than 6 joints need one, since the full 6x6 operator is then singular.
    Raises NearSingular when the task Jacobian's smallest singular value
    drops below 1e-6; applies damped least squares below 1e-3."""
    q = model.check_q(q)
    sel_key = None if selection is None else np.asarray(selection, dtype=float).tobytes()
    key = (id(model), q.tobytes(), "mx", sel_key)
    return _cached(_FRAME_CACHE, key, lambda: _task_space_mass(model, q, selection))


def _task_space_mass(
    model: ArmModel, q: np.ndarray, selection: np.ndarray | None
) -> np.ndarray:
    jac = jacobian(model, q)
    if selection is not None:
        jac = np.asarray(selection, dtype=float) @ jac
    k = jac.shape[0]
    sigma_min = np.linalg.svd(jac, compute_uv=False)[-1]
    if sigma_min <= SINGULARITY_EIGEN_FLOOR:
        raise NearSingular(f"smallest Jacobian singular value {sigma_min:.2e}")
    m = mass_matrix(model, q)
    a = jac @ np.linalg.solve(m, jac.T)
    if sigma_min < DAMPING_THRESHOLD or np.linalg.cond(a) > 1e12:
        a = a + DAMPING_LAMBDA * np.eye(k)
    mx = np.linalg.inv(a)
    return 0.5 * (mx + mx.T)


def step(
    model: ArmModel,
    state: JointState,
    tau: np.ndarray,
    f_ext: np.ndarray,
    dt: float,
) -> JointState:
    """Semi-implicit Euler update of the joint state.

    qdd = M^-1 (tau + J^T F_ext - C qd - g - friction); velocities update
    first, then positions. Joint limits clamp position with zero velocity.
    """
    tau = np.asarray(tau, dtype=float)
    f_ext = np.asarray(f_ext, dtype=float)
    if not (0.0 < dt <= DT_MAX):
        raise InvalidInput(f"dt must be in (0, {DT_MAX}] s")
    if tau.shape != (model.dof,) or not np.all(np.isfinite(tau)):
        raise InvalidInput("torque must be finite with one entry per joint")
    if f_ext.shape != (6,) or not np.all(np.isfinite(f_ext)):
        raise InvalidInput("external wrench must be a finite 6-vector")

    q, qd = state.q, state.qd
    bias = bias_term(model, q, qd)
    friction = np.array([j.viscous_friction for j in model.joints]) * qd
    tau_ext = jacobian(model, q).T @ f_ext
    m = mass_matrix(model, q)
    rhs = tau + tau_ext - bias - friction
    qdd = np.linalg.solve(m, rhs)

    qd_new = qd + qdd * dt
    q_new = q + qd_new * dt
    for i, joint in enumerate(model.joints):
        if q_new[i] < joint.limit_lower:
            q_new[i] = joint.limit_lower
            qd_new[i] = 0.0
        elif q_new[i] > joint.limit_upper:
            q_new[i] = joint.limit_upper
            qd_new[i] = 0.0
    return JointState(q_new, qd_new)


def kinetic_energy(model: ArmModel, state: JointState) -> float:
    return float(0.5 * state.qd @ mass_matrix(model, state.q) @ state.qd)


def potential_energy(model: ArmModel, q: np.ndarray) -> float:
    """Gravitational potential, zero at com positions of the base frame origin."""
    frames = link_frames(model, q)
    total = 0.0
    for link, frame in zip(model.links, frames[:-1]):
        com_base = frame.apply(link.com)
        total -= link.mass * (model.gravity @ com_base)
    return float(total)
