"""2D stroke to 3D surface path projection through the depth sensor."""

from __future__ import annotations

import numpy as np

from ..errors import DepthHole, InvalidInput
from .cloud import CameraModel, NormalMap, OrganizedPointCloud, Stroke2D
from .normals import estimate_normals_integral
from .path import Path3D

BRIDGE_RADIUS_PX = 3


def _bridge_offsets():
    """Pixel offsets within the bridging radius, sorted by distance."""
    r = BRIDGE_RADIUS_PX
    offsets = [
        (dr, dc)
        for dr in range(-r, r + 1)
        for dc in range(-r, r + 1)
        if dr * dr + dc * dc <= r * r
    ]
    offsets.sort(key=lambda o: o[0] * o[0] + o[1] * o[1])
    return offsets


_OFFSETS = _bridge_offsets()


def project_stroke(
    stroke: Stroke2D,
    cloud: OrganizedPointCloud,
    camera: CameraModel,
    normal_map: NormalMap | None = None,
) -> Path3D:
    """Project stroke pixels onto the sensed surface, in the base frame.

    Each pixel samples the organized cloud cell it lands on; cells without
    valid depth (or without a valid normal) are bridged by the nearest usable
    cell within 3 px. Normals come from `normal_map` (computed with the
    integral-image estimator when not supplied) and are rotated to base.
    """
    if len(stroke) < 2:
        raise InvalidInput("a path stroke needs at least 2 pixels")
    if normal_map is None:
        normal_map = estimate_normals_integral(cloud)
    normal_cells = np.argwhere(normal_map.valid)
    if normal_cells.shape[0] == 0:
        raise InvalidInput("normal map has no valid cells")

    points = []
    normals = []
    for u, v in stroke.pixels:
        c0, r0 = int(round(u)), int(round(v))
        if not (0 <= r0 < cloud.height and 0 <= c0 < cloud.width):
            raise DepthHole((u, v))
        cell = None
        for dr, dc in _OFFSETS:
            r, c = r0 + dr, c0 + dc
            if 0 <= r < cloud.height and 0 <= c < cloud.width and cloud.valid[r, c]:
                cell = (r, c)
                break
        if cell is None:
            raise DepthHole((u, v))
        r, c = cell
        # normals are invalid over a whole smoothing window around holes and
        # borders; take the nearest valid normal cell instead
        if normal_map.valid[r, c]:
            nr, nc = r, c
        else:
            nr, nc = normal_cells[np.argmin(np.sum((normal_cells - [r, c]) ** 2, axis=1))]
        points.append(camera.sensor_to_base.apply(cloud.points[r, c]))
        normals.append(camera.sensor_to_base.rotate(normal_map.normals[nr, nc]))

    # adjacent pixels can land on the same cell; keep one point per cell run
    kept_p, kept_n = [points[0]], [normals[0]]
    for p, n in zip(points[1:], normals[1:]):
        if np.linalg.norm(p - kept_p[-1]) > 1e-12:
            kept_p.append(p)
            kept_n.append(n)
    if len(kept_p) < 2:
        raise InvalidInput("stroke collapsed to a single 3D point")
    return Path3D(np.array(kept_p), np.array(kept_n))


def reproject_path(path: Path3D, camera: CameraModel) -> np.ndarray:
    """Base-frame path points back to (u, v) pixels; inverse of projection."""
    to_sensor = camera.sensor_to_base.inverse()
    return np.array([camera.project(to_sensor.apply(p)) for p in path.points])
