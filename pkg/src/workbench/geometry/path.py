"""3D surface paths and their moving reference frames."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateTangent, InvalidInput


@dataclass(frozen=True)
class Path3D:
    """Ordered surface points (base frame) with paired unit normals."""

    points: np.ndarray  # (n, 3)
    normals: np.ndarray  # (n, 3)

    def __post_init__(self):
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        normals = np.atleast_2d(np.asarray(self.normals, dtype=float))
        if points.shape != normals.shape or points.shape[1] != 3:
            raise InvalidInput("points and normals must both be (n, 3)")
        if not np.all(np.isfinite(points)) or not np.all(np.isfinite(normals)):
            raise InvalidInput("path must be finite")
        lens = np.linalg.norm(normals, axis=1)
        if np.any(np.abs(lens - 1.0) > 1e-6):
            raise InvalidInput("normals must be unit length")
        if points.shape[0] > 1:
            gaps = np.linalg.norm(np.diff(points, axis=0), axis=1)
            if np.any(gaps <= 0):
                raise InvalidInput("consecutive path points must be distinct")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "normals", normals)

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class PathFrame:
    """Path point with the orthonormal triad {t, n, s} and the tool rotation."""

    p: np.ndarray
    t: np.ndarray
    n: np.ndarray
    s: np.ndarray
    tool_rotation: np.ndarray  # 3x3, tool-to-base


def downsample_path(path: Path3D, min_spacing: float = 0.01) -> Path3D:
    """Keep points at least `min_spacing` apart; endpoints always retained."""
    if min_spacing <= 0:
        raise InvalidInput("min_spacing must be positive")
    if len(path) <= 1:
        return path
    spacing = min_spacing * (1.0 - 1e-9)  # tolerate accumulated rounding
    keep = [0]
    for i in range(1, len(path) - 1):
        if np.linalg.norm(path.points[i] - path.points[keep[-1]]) >= spacing:
            keep.append(i)
    last = len(path) - 1
    # always keep the endpoint; drop predecessors that would violate spacing
    while len(keep) > 1 and np.linalg.norm(path.points[last] - path.points[keep[-1]]) < spacing:
        keep.pop()
    keep.append(last)
    return Path3D(path.points[keep], path.normals[keep])


def path_frames(path: Path3D) -> list[PathFrame]:
    """Build {t, n, s} at every path point.

    t_i is the step to the next point projected off the normal and
    normalized; s_i = t_i x n_i. The last point reuses the last tangent.
    """
    if len(path) < 2:
        raise InvalidInput("need at least 2 path points to build frames")
    frames: list[PathFrame] = []
    tangents = []
    for i in range(len(path) - 1):
        delta = path.points[i + 1] - path.points[i]
        n = path.normals[i]
        t = delta - (delta @ n) * n
        norm_t = np.linalg.norm(t)
        if norm_t < 1e-9:
            raise DegenerateTangent(i)
        tangents.append(t / norm_t)
    # the last point reuses the last tangent, re-projected onto its own
    # tangent plane so the triad stays orthonormal
    n_last = path.normals[-1]
    t_last = tangents[-1] - (tangents[-1] @ n_last) * n_last
    norm_last = np.linalg.norm(t_last)
    if norm_last < 1e-9:
        raise DegenerateTangent(len(path) - 1)
    tangents.append(t_last / norm_last)
    for i in range(len(path)):
        n = path.normals[i]
        t = tangents[i]
        s = np.cross(t, n)
        frame = PathFrame(
            p=path.points[i],
            t=t,
            n=n,
            s=s,
            tool_rotation=np.zeros((3, 3)),
        )
        object.__setattr__(frame, "tool_rotation", tool_orientation(frame))
        frames.append(frame)
    return frames


def tool_orientation(frame: PathFrame) -> np.ndarray:
    """Tool-to-base rotation with columns [n x t | t | -n].

    Aligns the tool z-axis with -n and the tool y-axis with t. The first
    column is n x t (= -s) rather than s so the determinant is +1: a proper
    rotation, not a reflection.
    """
    r = np.column_stack([np.cross(frame.n, frame.t), frame.t, -frame.n])
    return r
