"""Penalty contact against a height field sampled from the sensed surface.

This closes the physical loop the real robot gets from the world: the
resulting wrench is the external generalized force the arm dynamics see.
The contact normal comes from the height-field gradient, not the perception
normal map, so perception errors show up honestly in tracking.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInput, InvalidSurface, OutOfDomain
from ..geometry.cloud import CameraModel, OrganizedPointCloud
from ..transforms import RigidTransform


@dataclass(frozen=True)
class ToolGeometry:
    """Single contact point at a fixed tool-frame offset; tool z approaches."""

    contact_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        offset = np.asarray(self.contact_offset, dtype=float)
        if offset.shape != (3,) or not np.all(np.isfinite(offset)):
            raise InvalidInput("contact offset must be a finite 3-vector")
        object.__setattr__(self, "contact_offset", offset)


@dataclass(frozen=True)
class SurfaceModel:
    """Bilinear height field z(x, y) in the base frame with contact params."""

    xs: np.ndarray  # (nx,) ascending
    ys: np.ndarray  # (ny,) ascending
    heights: np.ndarray  # (ny, nx)
    k_c: float = 1e4  # contact stiffness N/m
    b_c: float = 100.0  # contact damping N s/m
    mu_v: float = 5.0  # tangential viscous coefficient N s/m

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        heights = np.asarray(self.heights, dtype=float)
        if heights.shape != (ys.size, xs.size):
            raise InvalidInput("height grid must be (len(ys), len(xs))")
        if not np.all(np.isfinite(heights)):
            raise InvalidInput("height field must be finite")
        if self.k_c <= 0 or self.b_c < 0 or self.mu_v < 0:
            raise InvalidInput("contact parameters out of range")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "heights", heights)

    def _locate(self, x: float, y: float):
        if not (self.xs[0] <= x <= self.xs[-1] and self.ys[0] <= y <= self.ys[-1]):
            raise OutOfDomain(f"({x:.3f}, {y:.3f}) outside the height field")
        i = int(np.clip(np.searchsorted(self.xs, x) - 1, 0, self.xs.size - 2))
        j = int(np.clip(np.searchsorted(self.ys, y) - 1, 0, self.ys.size - 2))
        return i, j

    def height_at(self, x: float, y: float) -> float:
        i, j = self._locate(x, y)
        x0, x1 = self.xs[i], self.xs[i + 1]
        y0, y1 = self.ys[j], self.ys[j + 1]
        tx = 0.0 if x1 == x0 else (x - x0) / (x1 - x0)
        ty = 0.0 if y1 == y0 else (y - y0) / (y1 - y0)
        z = self.heights
        return float(
            z[j, i] * (1 - tx) * (1 - ty)
            + z[j, i + 1] * tx * (1 - ty)
            + z[j + 1, i] * (1 - tx) * ty
            + z[j + 1, i + 1] * tx * ty
        )

    def normal_at(self, x: float, y: float) -> np.ndarray:
        """Upward unit normal from the height-field gradient."""
        i, j = self._locate(x, y)
        dx = self.xs[i + 1] - self.xs[i]
        dy = self.ys[j + 1] - self.ys[j]
        z = self.heights
        dzdx = (z[j, i + 1] - z[j, i] + z[j + 1, i + 1] - z[j + 1, i]) / (2 * dx)
        dzdy = (z[j + 1, i] - z[j, i] + z[j + 1, i + 1] - z[j, i + 1]) / (2 * dy)
        n = np.array([-dzdx, -dzdy, 1.0])
        return n / np.linalg.norm(n)


def contact_wrench(
    surface: SurfaceModel,
    tool_pose: RigidTransform,
    tool_velocity: np.ndarray,
    tool: ToolGeometry | None = None,
) -> tuple[np.ndarray, bool]:
    """Penalty wrench at the end-effector; (wrench, contact flag).

    Normal force (k_c d - b_c v_n) clamped at zero plus tangential viscous
    drag; torque from the contact-point lever arm. Contact flag is d > 0.
    """
    tool = tool or ToolGeometry()
    tool_velocity = np.asarray(tool_velocity, dtype=float)
    if not np.all(np.isfinite(tool_pose.translation)):
        raise InvalidInput("tool pose must be finite")
    lever = tool_pose.rotation @ tool.contact_offset
    cp = tool_pose.translation + lever
    v_cp = tool_velocity[:3] + np.cross(tool_velocity[3:], lever)

    z_surface = surface.height_at(cp[0], cp[1])
    n = surface.normal_at(cp[0], cp[1])
    d = (z_surface - cp[2]) * n[2]
    if d <= 0:
        return np.zeros(6), False
    v_n = float(v_cp @ n)
    f_normal = max(surface.k_c * d - surface.b_c * v_n, 0.0)
    v_t = v_cp - v_n * n
    force = f_normal * n - surface.mu_v * v_t
    torque = np.cross(lever, force)
    return np.concatenate([force, torque]), True


def surface_from_cloud(
    cloud: OrganizedPointCloud,
    camera: CameraModel,
    resolution: float | None = None,
    contact_params: dict | None = None,
) -> SurfaceModel:
    """Build a base-frame height field from the sensed cloud.

    Points are binned on an xy grid at `resolution` (default: adapted to the
    cloud's point density); cells keep the mean z. Holes are filled by
    repeated neighbor averaging. More than 50% empty cells is an
    InvalidSurface."""
    pts = camera.sensor_to_base.apply(cloud.points[cloud.valid])
    if pts.shape[0] < 4:
        raise InvalidSurface("too few valid points")
    xmin, ymin = pts[:, 0].min(), pts[:, 1].min()
    xmax, ymax = pts[:, 0].max(), pts[:, 1].max()
    if resolution is None:
        footprint = max((xmax - xmin) * (ymax - ymin), 1e-12)
        resolution = max(0.002, 1.5 * float(np.sqrt(footprint / pts.shape[0])))
    if xmax - xmin < resolution or ymax - ymin < resolution:
        raise InvalidSurface("surface footprint smaller than the grid resolution")
    xs = np.arange(xmin, xmax + resolution, resolution)
    ys = np.arange(ymin, ymax + resolution, resolution)
    sums = np.zeros((ys.size, xs.size))
    counts = np.zeros((ys.size, xs.size))
    ix = np.clip(((pts[:, 0] - xmin) / resolution).astype(int), 0, xs.size - 1)
    iy = np.clip(((pts[:, 1] - ymin) / resolution).astype(int), 0, ys.size - 1)
    np.add.at(sums, (iy, ix), pts[:, 2])
    np.add.at(counts, (iy, ix), 1.0)
    filled = counts > 0
    if filled.mean() < 0.5:
        raise InvalidSurface(f"only {filled.mean():.0%} of height cells observed")
    heights = np.where(filled, sums / np.maximum(counts, 1), np.nan)
    heights = _fill_holes(heights)
    params = contact_params or {}
    return SurfaceModel(xs, ys, heights, **params)


def _fill_holes(z: np.ndarray) -> np.ndarray:
    z = z.copy()
    for _ in range(z.size):
        holes = np.isnan(z)
        if not holes.any():
            break
        padded = np.pad(z, 1, constant_values=np.nan)
        stacks = np.stack(
            [padded[1:-1, :-2], padded[1:-1, 2:], padded[:-2, 1:-1], padded[2:, 1:-1]]
        )
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            means = np.nanmean(stacks, axis=0)
        fillable = holes & np.isfinite(means)
        if not fillable.any():
            break
        z[fillable] = means[fillable]
    return z
