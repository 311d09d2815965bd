"""Path-tracking reference generator: trapezoidal arc-length profile over the
path polyline, with pose, twist, and acceleration targets."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInput
from ..geometry.path import PathFrame
from ..transforms import RigidTransform, rotation_about_axis, rotation_log


@dataclass(frozen=True)
class SpeedProfile:
    v_max: float = 0.05  # m/s
    a_max: float = 0.25  # m/s^2

    def __post_init__(self):
        if self.v_max <= 0 or self.a_max <= 0:
            raise InvalidInput("profile limits must be positive")


@dataclass(frozen=True)
class MotionTarget:
    """Desired pose, twist, and acceleration, plus the active path frame."""

    pose: RigidTransform
    twist: np.ndarray = field(default_factory=lambda: np.zeros(6))
    accel: np.ndarray = field(default_factory=lambda: np.zeros(6))
    frame: PathFrame | None = None
    finished: bool = False


def _arc_lengths(frames: list[PathFrame]) -> np.ndarray:
    pts = np.array([f.p for f in frames])
    segs = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(segs)])


def _trapezoid(length: float, v_max: float, a_max: float):
    """(duration, s(t), sdot(t), sddot(t)) for a trapezoidal profile."""
    if length <= 0:
        return 0.0, None
    if length >= v_max**2 / a_max:
        t_acc = v_max / a_max
        duration = length / v_max + v_max / a_max
        v_peak = v_max
    else:
        v_peak = np.sqrt(length * a_max)
        t_acc = v_peak / a_max
        duration = 2.0 * t_acc

    def eval_profile(t: float):
        if t <= 0:
            return 0.0, 0.0, a_max
        if t >= duration:
            return length, 0.0, 0.0
        if t < t_acc:
            return 0.5 * a_max * t * t, a_max * t, a_max
        if t <= duration - t_acc:
            s0 = 0.5 * a_max * t_acc**2
            return s0 + v_peak * (t - t_acc), v_peak, 0.0
        td = duration - t
        return length - 0.5 * a_max * td * td, a_max * td, -a_max

    return duration, eval_profile


def profile_duration(frames: list[PathFrame], profile: SpeedProfile) -> float:
    if not frames:
        raise InvalidInput("empty frame list")
    length = float(_arc_lengths(frames)[-1])
    duration, _ = _trapezoid(length, profile.v_max, profile.a_max)
    return duration


def track_path(frames: list[PathFrame], elapsed: float, profile: SpeedProfile) -> MotionTarget:
    """Reference pose/twist/accel at `elapsed` seconds into the path.

    Position interpolates linearly along the polyline; orientation slerps
    between the per-frame tool rotations. Clamps at both path ends."""
    if not frames:
        raise InvalidInput("empty frame list")
    if len(frames) == 1:
        return MotionTarget(
            pose=RigidTransform(frames[0].tool_rotation, frames[0].p),
            frame=frames[0],
            finished=True,
        )
    arcs = _arc_lengths(frames)
    length = float(arcs[-1])
    duration, eval_profile = _trapezoid(length, profile.v_max, profile.a_max)
    t = float(np.clip(elapsed, 0.0, duration))
    s, sdot, sddot = eval_profile(t)
    finished = elapsed >= duration
    if finished:
        sdot = sddot = 0.0

    i = int(np.searchsorted(arcs, s, side="right") - 1)
    i = min(max(i, 0), len(frames) - 2)
    seg_len = arcs[i + 1] - arcs[i]
    u = 0.0 if seg_len <= 0 else (s - arcs[i]) / seg_len
    f0, f1 = frames[i], frames[i + 1]

    p = (1 - u) * f0.p + u * f1.p
    direction = (f1.p - f0.p) / seg_len if seg_len > 0 else np.zeros(3)

    rel = rotation_log(f1.tool_rotation @ f0.tool_rotation.T)
    angle = np.linalg.norm(rel)
    if angle > 1e-12:
        rot = rotation_about_axis(rel / angle, angle * u) @ f0.tool_rotation
        omega = rel / seg_len * sdot if seg_len > 0 else np.zeros(3)
    else:
        rot = f0.tool_rotation
        omega = np.zeros(3)

    twist = np.concatenate([direction * sdot, omega])
    accel = np.concatenate([direction * sddot, np.zeros(3)])
    active = f0 if u < 0.5 else f1
    return MotionTarget(
        pose=RigidTransform(rot, p), twist=twist, accel=accel, frame=active, finished=finished
    )
