"""Organized point clouds, camera models, and depth-image I/O."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInput
from ..transforms import RigidTransform


@dataclass(frozen=True)
class OrganizedPointCloud:
    """Row-major grid of 3D points (meters, sensor frame) with a validity mask."""

    points: np.ndarray  # (height, width, 3)
    valid: np.ndarray  # (height, width) bool

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        valid = np.asarray(self.valid, dtype=bool)
        if points.ndim != 3 or points.shape[2] != 3:
            raise InvalidInput("points must have shape (height, width, 3)")
        if valid.shape != points.shape[:2]:
            raise InvalidInput("valid mask shape must match the point grid")
        if points.shape[0] == 0 or points.shape[1] == 0:
            raise InvalidInput("empty point cloud")
        if not np.all(np.isfinite(points[valid])):
            raise InvalidInput("valid points must be finite")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "valid", valid)

    @property
    def height(self) -> int:
        return self.points.shape[0]

    @property
    def width(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class CameraModel:
    """Pinhole intrinsics plus the sensor-to-base rigid transform."""

    fx: float
    fy: float
    cx: float
    cy: float
    sensor_to_base: RigidTransform = field(default_factory=RigidTransform.identity)

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise InvalidInput("focal lengths must be positive")

    def backproject(self, u: float, v: float, depth: float) -> np.ndarray:
        """Pixel + depth (meters along z) to a sensor-frame point."""
        return np.array(
            [(u - self.cx) * depth / self.fx, (v - self.cy) * depth / self.fy, depth]
        )

    def project(self, point: np.ndarray) -> tuple[float, float]:
        """Sensor-frame point to pixel coordinates."""
        x, y, z = point
        if z <= 0:
            raise InvalidInput("cannot project a point at or behind the sensor")
        return (self.fx * x / z + self.cx, self.fy * y / z + self.cy)


@dataclass(frozen=True)
class NormalMap:
    """Per-pixel unit normals aligned with an organized cloud grid."""

    normals: np.ndarray  # (height, width, 3)
    valid: np.ndarray  # (height, width) bool

    def __post_init__(self):
        normals = np.asarray(self.normals, dtype=float)
        valid = np.asarray(self.valid, dtype=bool)
        if normals.ndim != 3 or normals.shape[2] != 3:
            raise InvalidInput("normals must have shape (height, width, 3)")
        if valid.shape != normals.shape[:2]:
            raise InvalidInput("valid mask shape must match the normal grid")
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "valid", valid)


@dataclass(frozen=True)
class Stroke2D:
    """Ordered (u, v) pixel coordinates drawn on the scene image."""

    pixels: np.ndarray  # (n, 2) float

    def __post_init__(self):
        pixels = np.atleast_2d(np.asarray(self.pixels, dtype=float))
        if pixels.ndim != 2 or pixels.shape[1] != 2:
            raise InvalidInput("stroke pixels must have shape (n, 2)")
        object.__setattr__(self, "pixels", pixels)

    def __len__(self) -> int:
        return self.pixels.shape[0]

    def is_closed(self, tol: float = 0.5) -> bool:
        return len(self) >= 3 and np.linalg.norm(self.pixels[0] - self.pixels[-1]) <= tol


def cloud_from_depth(depth: np.ndarray, camera: CameraModel) -> OrganizedPointCloud:
    """Backproject a depth image (meters; <=0 or non-finite marks holes)."""
    depth = np.asarray(depth, dtype=float)
    if depth.ndim != 2:
        raise InvalidInput("depth image must be 2D")
    h, w = depth.shape
    valid = np.isfinite(depth) & (depth > 0)
    us, vs = np.meshgrid(np.arange(w, dtype=float), np.arange(h, dtype=float))
    z = np.where(valid, depth, 0.0)
    points = np.stack(
        [(us - camera.cx) * z / camera.fx, (vs - camera.cy) * z / camera.fy, z], axis=-1
    )
    return OrganizedPointCloud(points, valid)


def load_depth_png(path) -> np.ndarray:
    """16-bit single-channel PNG in millimeters -> depth in meters (0 = hole)."""
    from PIL import Image

    img = Image.open(path)
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise InvalidInput("depth PNG must be single-channel")
    return arr.astype(float) / 1000.0


def save_depth_png(path, depth_m: np.ndarray) -> None:
    from PIL import Image

    mm = np.clip(np.nan_to_num(np.asarray(depth_m, dtype=float)) * 1000.0, 0, 65535)
    Image.fromarray(mm.astype(np.uint16)).save(path)


def load_cloud_xyz(path) -> OrganizedPointCloud:
    """Whitespace-separated XYZ text: first line `width height`, then one
    `x y z` row per cell in row-major order (`nan nan nan` marks holes)."""
    with open(path) as f:
        header = f.readline().split()
        if len(header) != 2:
            raise InvalidInput("xyz header must be 'width height'")
        w, h = int(header[0]), int(header[1])
        data = np.loadtxt(f)
    if data.shape != (w * h, 3):
        raise InvalidInput(f"expected {w * h} rows of x y z, got {data.shape}")
    points = data.reshape(h, w, 3)
    valid = np.all(np.isfinite(points), axis=-1)
    points = np.where(valid[..., None], points, 0.0)
    return OrganizedPointCloud(points, valid)


def save_cloud_xyz(path, cloud: OrganizedPointCloud) -> None:
    points = np.where(cloud.valid[..., None], cloud.points, np.nan)
    with open(path, "w") as f:
        f.write(f"{cloud.width} {cloud.height}\n")
        np.savetxt(f, points.reshape(-1, 3), fmt="%.9g")
