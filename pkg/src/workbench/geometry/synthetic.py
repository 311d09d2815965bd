"""Synthetic depth scenes used by tests and analytic scenario surfaces."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInput
from .cloud import CameraModel, OrganizedPointCloud, cloud_from_depth


def default_camera(width: int = 160, height: int = 120, sensor_to_base=None) -> CameraModel:
    from ..transforms import RigidTransform

    kwargs = {}
    if sensor_to_base is not None:
        kwargs["sensor_to_base"] = sensor_to_base
    else:
        kwargs["sensor_to_base"] = RigidTransform.identity()
    return CameraModel(fx=120.0, fy=120.0, cx=(width - 1) / 2.0, cy=(height - 1) / 2.0, **kwargs)


def plane_depth(width: int, height: int, z: float = 1.0) -> np.ndarray:
    return np.full((height, width), float(z))


def sphere_depth(
    camera: CameraModel,
    width: int,
    height: int,
    center=(0.0, 0.0, 1.2),
    radius: float = 0.2,
    background: float | None = None,
) -> np.ndarray:
    """Depth image of a sphere seen from the sensor origin along +z.

    Pixels whose ray misses the sphere get `background` depth (0 = hole).
    """
    cx, cy, cz = center
    if cz <= radius:
        raise InvalidInput("sphere must be fully in front of the sensor")
    us, vs = np.meshgrid(np.arange(width, dtype=float), np.arange(height, dtype=float))
    # ray direction per pixel, z component normalized to 1
    rx = (us - camera.cx) / camera.fx
    ry = (vs - camera.cy) / camera.fy
    a = rx**2 + ry**2 + 1.0
    b = -2.0 * (rx * cx + ry * cy + cz)
    c = cx**2 + cy**2 + cz**2 - radius**2
    disc = b**2 - 4.0 * a * c
    hit = disc >= 0
    depth = np.zeros((height, width))
    t = (-b - np.sqrt(np.where(hit, disc, 0.0))) / (2.0 * a)  # near intersection, z-depth
    depth[hit] = t[hit]
    if background is not None:
        depth[~hit] = background
    return depth


def wave_depth(
    camera: CameraModel,
    width: int,
    height: int,
    z0: float = 1.0,
    amplitude: float = 0.02,
    wavelength: float = 0.3,
) -> np.ndarray:
    """Gently waved plane z = z0 + a*sin(2*pi*x/wavelength)."""
    us, vs = np.meshgrid(np.arange(width, dtype=float), np.arange(height, dtype=float))
    x0 = (us - camera.cx) * z0 / camera.fx
    return z0 + amplitude * np.sin(2.0 * np.pi * x0 / wavelength)


def plane_cloud(width: int = 60, height: int = 60, z: float = 1.0, camera=None) -> OrganizedPointCloud:
    camera = camera or default_camera(width, height)
    return cloud_from_depth(plane_depth(width, height, z), camera)


def sphere_cloud(
    width: int = 120,
    height: int = 120,
    center=(0.0, 0.0, 1.2),
    radius: float = 0.2,
    camera=None,
) -> OrganizedPointCloud:
    camera = camera or default_camera(width, height)
    return cloud_from_depth(sphere_depth(camera, width, height, center, radius), camera)
