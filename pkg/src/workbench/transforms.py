"""Rigid transforms and small rotation utilities used throughout."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def rotation_about_axis(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rotation matrix about a unit axis (Rodrigues)."""
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n == 0.0:
        raise ValueError("zero rotation axis")
    axis = axis / n
    k = skew(axis)
    c, s = np.cos(angle), np.sin(angle)
    return np.eye(3) + s * k + (1.0 - c) * (k @ k)


def skew(v: np.ndarray) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def rotation_log(rot: np.ndarray) -> np.ndarray:
    """Rotation vector (axis * angle) of a proper rotation matrix."""
    trace = np.clip((np.trace(rot) - 1.0) / 2.0, -1.0, 1.0)
    angle = np.arccos(trace)
    if angle < 1e-12:
        return np.zeros(3)
    if np.pi - angle < 1e-6:
        # near pi: extract axis from the symmetric part
        a = np.sqrt(np.maximum(np.diag(rot) - np.cos(angle), 0.0) / (1.0 - np.cos(angle)))
        # fix signs from off-diagonal terms
        if rot[2, 1] - rot[1, 2] < 0:
            a[0] = -a[0]
        if rot[0, 2] - rot[2, 0] < 0:
            a[1] = -a[1]
        if rot[1, 0] - rot[0, 1] < 0:
            a[2] = -a[2]
        return angle * a / np.linalg.norm(a)
    w = np.array([rot[2, 1] - rot[1, 2], rot[0, 2] - rot[2, 0], rot[1, 0] - rot[0, 1]])
    return angle * w / (2.0 * np.sin(angle))


def is_proper_rotation(rot: np.ndarray, tol: float = 1e-9) -> bool:
    rot = np.asarray(rot, dtype=float)
    if rot.shape != (3, 3):
        return False
    return (
        np.allclose(rot.T @ rot, np.eye(3), atol=tol)
        and abs(np.linalg.det(rot) - 1.0) < max(tol, 1e-9)
    )


@dataclass(frozen=True)
class RigidTransform:
    """Rotation + translation, mapping points from one frame to another."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float))
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float))
        if not is_proper_rotation(self.rotation, tol=1e-6):
            raise ValueError("rotation must be proper orthonormal")

    @classmethod
    def _fast(cls, rotation: np.ndarray, translation: np.ndarray) -> "RigidTransform":
        """Skip validation; for internal composition of already-valid poses."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "rotation", rotation)
        object.__setattr__(obj, "translation", translation)
        return obj

    def apply(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return points @ self.rotation.T + self.translation

    def rotate(self, vectors: np.ndarray) -> np.ndarray:
        return np.asarray(vectors, dtype=float) @ self.rotation.T

    def inverse(self) -> "RigidTransform":
        rt = self.rotation.T
        return RigidTransform._fast(np.ascontiguousarray(rt), -rt @ self.translation)

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """self ∘ other: apply `other` first, then `self`."""
        return RigidTransform._fast(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform()
