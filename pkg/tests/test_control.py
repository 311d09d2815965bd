"""Impedance, force-loop, trajectory, and hybrid-controller tests."""

import numpy as np
import pytest

from workbench.contact import SurfaceModel, contact_wrench
from workbench.control import (
    ControlGains,
    ForceEstimator,
    HybridController,
    MotionTarget,
    SpeedProfile,
    cartesian_error,
    critically_damped,
    estimate_contact_force,
    force_torque,
    hybrid_torque,
    impedance_torque,
    profile_duration,
    track_path,
)
from workbench.control.controller import ForceLoopState, frame_weight
from workbench.dynamics import (
    JointState,
    default_arm,
    forward_kinematics,
    gravity_term,
    jacobian,
    solve_ik,
    step,
    task_space_mass,
)
from workbench.errors import InvalidInput
from workbench.geometry.path import Path3D, PathFrame, path_frames, tool_orientation
from workbench.transforms import RigidTransform, rotation_about_axis

DT = 1e-3
Q_HOME = np.array([0.0, 0.6, 0.0, 1.2, 0.0, -0.8, 0.0])
Q_DOWN = np.array([0.0, 0.9, 0.0, 1.6, 0.0, np.pi - 2.5, np.pi / 2])


def aligned_frame():
    """Path frame with t = +x, n = +z, s = t x n = -y."""
    t = np.array([1.0, 0.0, 0.0])
    n = np.array([0.0, 0.0, 1.0])
    f = PathFrame(np.zeros(3), t, n, np.cross(t, n), np.eye(3))
    object.__setattr__(f, "tool_rotation", tool_orientation(f))
    return f


def straight_frames(x0=0.43, x1=0.68, z=0.14, count=26):
    xs = np.linspace(x0, x1, count)
    pts = np.stack([xs, np.zeros_like(xs), np.full_like(xs, z)], axis=1)
    normals = np.tile([0.0, 0.0, 1.0], (count, 1))
    return path_frames(Path3D(pts, normals))


class TestCartesianError:
    def test_zero_at_coincident_poses(self):
        pose = RigidTransform(rotation_about_axis([0, 0, 1], 0.7), [0.1, 0.2, 0.3])
        assert np.allclose(cartesian_error(pose, pose), np.zeros(6))

    def test_pure_translation(self):
        a = RigidTransform(np.eye(3), [0.1, 0.0, 0.0])
        b = RigidTransform(np.eye(3), [0.0, 0.0, 0.0])
        e = cartesian_error(a, b)
        assert np.allclose(e, [0.1, 0, 0, 0, 0, 0])

    def test_pure_rotation_is_rotation_vector(self):
        rot = rotation_about_axis([0, 1, 0], 0.3)
        e = cartesian_error(RigidTransform(rot, np.zeros(3)), RigidTransform())
        assert np.allclose(e[:3], 0.0)
        assert np.allclose(e[3:], [0.0, 0.3, 0.0], atol=1e-12)

    def test_antisymmetric(self):
        a = RigidTransform(rotation_about_axis([1, 0, 0], 0.4), [0.2, 0, 0])
        b = RigidTransform(rotation_about_axis([1, 0, 0], 0.1), [0.0, 0.1, 0])
        # small-angle: e(a,b) ~ -e(b,a) exactly for translation, rotation here
        # shares an axis so the log is exactly antisymmetric
        assert np.allclose(cartesian_error(a, b), -cartesian_error(b, a))


class TestFrameWeight:
    def test_orthonormal_block_diagonal(self):
        f = straight_frames()[0]
        w = frame_weight(f)
        assert np.allclose(w.T @ w, np.eye(6), atol=1e-12)
        assert np.allclose(w[:3, 3:], 0.0) and np.allclose(w[3:, :3], 0.0)
        assert np.allclose(w[:3, 0], f.t)
        assert np.allclose(w[:3, 1], f.n)
        assert np.allclose(w[:3, 2], f.s)


class TestGains:
    def test_default_shape_and_validation(self):
        g = ControlGains()
        assert g.K_diag.shape == (6,)
        with pytest.raises(InvalidInput):
            ControlGains(K_diag=np.ones(5), D_diag=np.ones(5))
        with pytest.raises(InvalidInput):
            ControlGains(torque_limit=0.0)

    def test_warns_when_normal_stiffer_than_tangent(self):
        with pytest.warns(UserWarning):
            ControlGains(K_diag=np.array([10.0, 100.0, 10, 10, 10, 10]))

    def test_critically_damped_identity_frame(self):
        k = np.array([100.0, 400.0, 900.0, 1.0, 4.0, 9.0])
        m = np.diag([4.0, 4.0, 4.0, 1.0, 1.0, 1.0])
        d = critically_damped(k, m, np.eye(3))
        assert np.allclose(d, 2.0 * np.sqrt(k * np.diag(m)))


class TestImpedance:
    def test_gravity_compensation_at_target(self):
        """At the target with zero velocity the command reduces to g(q)."""
        model = default_arm(viscous_friction=0.0)
        state = JointState(Q_HOME.copy(), np.zeros(7))
        pose = forward_kinematics(model, Q_HOME).pose
        tau, f_d, e_x = impedance_torque(
            model, state, MotionTarget(pose=pose), ControlGains(), aligned_frame()
        )
        assert np.allclose(e_x, 0.0, atol=1e-12)
        assert np.allclose(tau, gravity_term(model, Q_HOME), atol=1e-9)

    def test_static_spring_wrench(self):
        """0.01 m offset along t with K_t = 1000 gives F_d = (-10, 0, 0)."""
        model = default_arm(viscous_friction=0.0)
        state = JointState(Q_HOME.copy(), np.zeros(7))
        pose = forward_kinematics(model, Q_HOME).pose
        target_pose = RigidTransform(pose.rotation, pose.translation - [0.01, 0, 0])
        gains = ControlGains(K_diag=np.array([1000.0, 1000, 1000, 50, 50, 50]))
        _, f_d, e_x = impedance_torque(
            model, state, MotionTarget(pose=target_pose), gains, aligned_frame()
        )
        assert np.allclose(e_x[:3], [0.01, 0, 0], atol=1e-12)
        assert np.allclose(f_d[:3], [-10.0, 0, 0], atol=1e-9)

    def test_closed_loop_compliance(self):
        """Steady displacement under a 10 N load matches F/K within 2%."""
        model = default_arm(viscous_friction=0.0)
        frame = aligned_frame()
        pose0 = forward_kinematics(model, Q_HOME).pose
        k = np.array([1000.0, 1000.0, 1000.0, 50.0, 50.0, 50.0])
        mx = task_space_mass(model, Q_HOME)
        basis = np.column_stack([frame.t, frame.n, frame.s])
        gains = ControlGains(K_diag=k, D_diag=critically_damped(k, mx, basis))
        target = MotionTarget(pose=pose0)
        f_ext = np.array([10.0, 0, 0, 0, 0, 0])
        state = JointState(Q_HOME.copy(), np.zeros(7))
        for _ in range(2000):
            tau, _, _ = impedance_torque(model, state, target, gains, frame)
            state = step(model, state, tau, f_ext, DT)
        disp = forward_kinematics(model, state.q).pose.translation - pose0.translation
        assert disp[0] == pytest.approx(10.0 / 1000.0, rel=0.02)
        assert abs(disp[1]) < 1e-3 and abs(disp[2]) < 1e-3

    def test_regulation_converges(self):
        """A 2 cm step target is reached to < 0.1 mm within 2 s."""
        model = default_arm(viscous_friction=0.0)
        frame = aligned_frame()
        pose0 = forward_kinematics(model, Q_HOME).pose
        target_pose = RigidTransform(pose0.rotation, pose0.translation + [0.02, 0, 0])
        k = np.array([1000.0, 1000.0, 1000.0, 50.0, 50.0, 50.0])
        mx = task_space_mass(model, Q_HOME)
        basis = np.column_stack([frame.t, frame.n, frame.s])
        gains = ControlGains(K_diag=k, D_diag=critically_damped(k, mx, basis))
        state = JointState(Q_HOME.copy(), np.zeros(7))
        for _ in range(2000):
            tau, _, _ = impedance_torque(
                model, state, MotionTarget(pose=target_pose), gains, frame
            )
            state = step(model, state, tau, np.zeros(6), DT)
        err = np.linalg.norm(
            forward_kinematics(model, state.q).pose.translation - target_pose.translation
        )
        assert err < 1e-4


class TestForceEstimation:
    def test_round_trip_exact(self):
        model = default_arm()
        wrench = np.array([3.0, -2.0, 5.0, 0.4, -0.1, 0.2])
        tau_ext = jacobian(model, Q_HOME).T @ wrench
        est, ok = estimate_contact_force(model, Q_HOME, tau_ext)
        assert ok
        assert np.allclose(est, wrench, atol=1e-6)

    def test_noise_rms_below_one_newton(self):
        """sigma = 0.05 Nm torque noise stays under 1 N RMS per force axis."""
        model = default_arm()
        rng = np.random.default_rng(7)
        wrench = np.array([0.0, 0.0, 10.0, 0, 0, 0])
        jac_t = jacobian(model, Q_DOWN).T
        errs = []
        for _ in range(200):
            tau_ext = jac_t @ wrench + rng.normal(0.0, 0.05, 7)
            est, ok = estimate_contact_force(model, Q_DOWN, tau_ext)
            assert ok
            errs.append(est[:3] - wrench[:3])
        rms = np.sqrt(np.mean(np.square(errs), axis=0))
        assert np.all(rms < 1.0)

    def test_invalid_near_singularity(self):
        model = default_arm()
        # fully extended: alternating joint axes collinear, Jacobian rank-deficient
        est, ok = estimate_contact_force(model, np.zeros(7), np.ones(7))
        assert not ok
        assert np.allclose(est, 0.0)

    def test_estimator_filters_and_flags_stale(self):
        model = default_arm()
        estimator = ForceEstimator()
        wrench = np.array([5.0, 0, 0, 0, 0, 0])
        tau_ext = jacobian(model, Q_HOME).T @ wrench
        first = estimator.update(model, Q_HOME, tau_ext, DT)
        assert np.allclose(first, wrench, atol=1e-6)  # filter seeds on first sample
        # a singular sample keeps the last estimate and marks it stale
        held = estimator.update(model, np.zeros(7), np.zeros(7), DT)
        assert estimator.stale
        assert np.allclose(held, first)
        estimator.update(model, Q_HOME, tau_ext, DT)
        assert not estimator.stale

    def test_estimator_step_response_settles(self):
        """First-order 20 Hz filter: ~95% of a step within 3 time constants."""
        model = default_arm()
        estimator = ForceEstimator()
        estimator.update(model, Q_HOME, np.zeros(7), DT)
        wrench = np.array([10.0, 0, 0, 0, 0, 0])
        tau_ext = jacobian(model, Q_HOME).T @ wrench
        tau_c = 1.0 / (2.0 * np.pi * 20.0)
        out = np.zeros(6)
        for _ in range(int(3 * tau_c / DT)):
            out = estimator.update(model, Q_HOME, tau_ext, DT)
        assert 0.93 * 10.0 < out[0] <= 10.0


class TestForceLoop:
    def test_zero_error_zero_wrench(self):
        model = default_arm()
        gains = ControlGains(f_n=10.0)
        frame = aligned_frame()
        measured = np.array([0.0, 0.0, 10.0, 0, 0, 0])
        tau, f_n_wrench, f_scalar = force_torque(
            model, JointState(Q_HOME.copy(), np.zeros(7)), measured, frame, gains
        )
        assert f_scalar == pytest.approx(10.0)
        assert np.allclose(f_n_wrench, 0.0, atol=1e-12)
        assert np.allclose(tau, 0.0, atol=1e-12)

    def test_low_force_pushes_into_surface(self):
        """Below the setpoint the commanded wrench points along -n."""
        gains = ControlGains(f_n=10.0, k_p=50.0)
        frame = aligned_frame()
        measured = np.array([0.0, 0.0, 4.0, 0, 0, 0])
        model = default_arm()
        _, f_n_wrench, _ = force_torque(
            model, JointState(Q_HOME.copy(), np.zeros(7)), measured, frame, gains
        )
        # e_f = -6, u = 300, wrench = 300 * (-n)
        assert np.allclose(f_n_wrench[:3], 300.0 * -frame.n)
        assert np.allclose(f_n_wrench[3:], 0.0)

    def test_derivative_filter_zero_on_constant(self):
        loop = ForceLoopState()
        assert loop.derivative(5.0, DT) == 0.0
        for _ in range(100):
            d = loop.derivative(5.0, DT)
        assert d == pytest.approx(0.0, abs=1e-12)

    def test_derivative_tracks_ramp(self):
        loop = ForceLoopState()
        loop.derivative(0.0, DT)
        for i in range(1, 400):
            d = loop.derivative(2.0 * i * DT, DT)
        assert d == pytest.approx(2.0, rel=0.05)


class TestHybrid:
    def test_sum_and_saturation(self):
        gains = ControlGains(torque_limit=50.0)
        tau, sat = hybrid_torque(np.full(7, 30.0), np.full(7, 30.0), gains)
        assert sat
        assert np.allclose(tau, 50.0)
        tau, sat = hybrid_torque(np.full(7, 10.0), np.full(7, -5.0), gains)
        assert not sat
        assert np.allclose(tau, 5.0)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInput):
            hybrid_torque(np.zeros(7), np.zeros(6), ControlGains())

    def test_tick_smoke(self):
        model = default_arm()
        frames = straight_frames()
        ctrl = HybridController(ControlGains(), DT)
        pose = RigidTransform(frames[0].tool_rotation, frames[0].p)
        target = MotionTarget(pose=pose, frame=frames[0])
        out = ctrl.tick(
            model, JointState(Q_DOWN.copy(), np.zeros(7)), target, frames[0], np.zeros(7)
        )
        assert out.tau.shape == (7,)
        assert np.all(np.isfinite(out.tau))
        ctrl.reset()
        assert not ctrl.estimator.stale


class TestTrajectory:
    def test_trapezoid_duration_oracle(self):
        """0.3 m at v=0.1, a=0.5 gives L/v + v/a = 3.2 s."""
        frames = straight_frames(0.0, 0.3, 0.0, 31)
        assert profile_duration(frames, SpeedProfile(0.1, 0.5)) == pytest.approx(3.2)

    def test_triangular_duration_oracle(self):
        """Short path never reaches v_max: duration = 2 sqrt(L/a)."""
        frames = straight_frames(0.0, 0.01, 0.0, 5)
        d = profile_duration(frames, SpeedProfile(0.5, 1.0))
        assert d == pytest.approx(2.0 * np.sqrt(0.01 / 1.0))

    def test_profile_position_matches_integrated_speed(self):
        frames = straight_frames(0.0, 0.3, 0.0, 31)
        profile = SpeedProfile(0.1, 0.5)
        duration = profile_duration(frames, profile)
        ts = np.linspace(0, duration, 1000)
        speeds = [np.linalg.norm(track_path(frames, t, profile).twist[:3]) for t in ts]
        integrated = np.trapezoid(speeds, ts)
        assert integrated == pytest.approx(0.3, rel=1e-3)

    def test_cruise_speed_is_v_max(self):
        frames = straight_frames(0.0, 0.3, 0.0, 31)
        profile = SpeedProfile(0.1, 0.5)
        mid = track_path(frames, 1.6, profile)
        assert np.linalg.norm(mid.twist[:3]) == pytest.approx(0.1)
        assert np.allclose(mid.twist[:3], [0.1, 0, 0], atol=1e-12)

    def test_endpoint_clamps(self):
        frames = straight_frames(0.0, 0.3, 0.0, 31)
        profile = SpeedProfile(0.1, 0.5)
        before = track_path(frames, -1.0, profile)
        assert np.allclose(before.pose.translation, frames[0].p)
        after = track_path(frames, 100.0, profile)
        assert after.finished
        assert np.allclose(after.pose.translation, frames[-1].p)
        assert np.allclose(after.twist, 0.0)

    def test_orientation_constant_on_straight_flat_path(self):
        frames = straight_frames()
        profile = SpeedProfile(0.05, 0.25)
        duration = profile_duration(frames, profile)
        for t in np.linspace(0, duration, 7):
            target = track_path(frames, t, profile)
            assert np.allclose(target.pose.rotation, frames[0].tool_rotation, atol=1e-9)

    def test_empty_frames_rejected(self):
        with pytest.raises(InvalidInput):
            track_path([], 0.0, SpeedProfile())
        with pytest.raises(InvalidInput):
            profile_duration([], SpeedProfile())


class TestClosedLoopForce:
    def test_settles_to_commanded_force(self):
        """Regulating in place against the penalty surface reaches the
        10 N setpoint within 5% and keeps contact."""
        model = default_arm(viscous_friction=0.0)
        surface = SurfaceModel(
            np.linspace(-0.9, 0.9, 90),
            np.linspace(-0.9, 0.9, 90),
            np.full((90, 90), 0.14),
        )
        frames = straight_frames()
        f0 = frames[0]
        start_pose = RigidTransform(f0.tool_rotation, f0.p + 0.01 * f0.n)
        ik = solve_ik(model, start_pose, Q_DOWN)
        assert ik.converged
        k = np.array([1000.0, 50.0, 1000.0, 50.0, 50.0, 50.0])
        mx = task_space_mass(model, ik.q)
        basis = np.column_stack([f0.t, f0.n, f0.s])
        gains = ControlGains(K_diag=k, D_diag=critically_damped(k, mx, basis), f_n=10.0)
        ctrl = HybridController(gains, DT)
        state = JointState(ik.q.copy(), np.zeros(7))
        target = MotionTarget(pose=RigidTransform(f0.tool_rotation, f0.p), frame=f0)
        forces = []
        flags = []
        for _ in range(1500):
            pose = forward_kinematics(model, state.q).pose
            twist = jacobian(model, state.q) @ state.qd
            wrench, flag = contact_wrench(surface, pose, twist)
            tau_ext = jacobian(model, state.q).T @ wrench
            out = ctrl.tick(model, state, target, f0, tau_ext)
            state = step(model, state, out.tau, wrench, DT)
            forces.append(wrench[2])
            flags.append(flag)
        steady = np.array(forces[-500:])
        assert abs(steady.mean() - 10.0) / 10.0 < 0.05
        assert all(flags[-1000:])
