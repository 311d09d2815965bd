"""Surface normal estimation on organized point clouds.

Two estimators: a fast integral-image method (smoothed horizontal/vertical
tangent cross product) and a local plane fit (smallest-eigenvalue PCA).
Both orient normals toward the sensor origin.
"""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateNeighborhood, InvalidInput
from .cloud import NormalMap, OrganizedPointCloud


def _window_sums(grid: np.ndarray, half_window: int) -> np.ndarray:
    """Sum of `grid` over the (2h+1)^2 window centered at each cell.

    Cells whose window does not fit inside the grid get NaN (marked invalid
    by the caller). Uses summed-area tables, O(1) per cell.
    """
    h, w = grid.shape[:2]
    k = half_window
    sat = np.zeros((h + 1, w + 1) + grid.shape[2:], dtype=float)
    np.cumsum(np.cumsum(grid, axis=0), axis=1, out=sat[1:, 1:])
    out = np.full(grid.shape, np.nan, dtype=float)
    if h - 2 * k <= 0 or w - 2 * k <= 0:
        return out
    # window rows [r-k, r+k], cols [c-k, c+k] for r in [k, h-k)
    out[k : h - k, k : w - k] = (
        sat[2 * k + 1 :, 2 * k + 1 :]
        - sat[: h - 2 * k, 2 * k + 1 :]
        - sat[2 * k + 1 :, : w - 2 * k]
        + sat[: h - 2 * k, : w - 2 * k]
    )
    return out


def _orient_toward_sensor(normals: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Flip normals so n . (sensor_origin - p) >= 0 (sensor at the origin)."""
    dots = np.sum(normals * points, axis=-1, keepdims=True)
    return np.where(dots > 0, -normals, normals)


def estimate_normals_integral(
    cloud: OrganizedPointCloud, half_window: int = 5
) -> NormalMap:
    """Average-3D-gradient normals via integral images.

    Horizontal and vertical tangent vectors (right-left / down-up point
    differences) are box-averaged over a (2*half_window+1)^2 window using six
    summed-area tables (one per tangent channel); the normal is their cross
    product. A pixel is valid only when every tangent cell in its window is
    valid; borders are invalid.
    """
    if half_window < 1:
        raise InvalidInput("half_window must be >= 1")
    p = cloud.points
    v = cloud.valid
    h, w = p.shape[:2]

    tu = np.zeros_like(p)
    tv = np.zeros_like(p)
    tu[:, 1:-1] = p[:, 2:] - p[:, :-2]
    tv[1:-1, :] = p[2:, :] - p[:-2, :]
    tu_valid = np.zeros((h, w), dtype=bool)
    tv_valid = np.zeros((h, w), dtype=bool)
    tu_valid[:, 1:-1] = v[:, 2:] & v[:, :-2]
    tv_valid[1:-1, :] = v[2:, :] & v[:-2, :]
    tu = np.where(tu_valid[..., None], tu, 0.0)
    tv = np.where(tv_valid[..., None], tv, 0.0)

    n_cells = float((2 * half_window + 1) ** 2)
    tu_sum = _window_sums(tu, half_window)
    tv_sum = _window_sums(tv, half_window)
    count = _window_sums((tu_valid & tv_valid).astype(float), half_window)
    with np.errstate(invalid="ignore"):
        full = count >= n_cells - 0.5

    normals = np.cross(tu_sum / n_cells, tv_sum / n_cells)
    norms = np.linalg.norm(normals, axis=-1, keepdims=True)
    ok = full & np.isfinite(norms[..., 0]) & (norms[..., 0] > 1e-12) & v
    normals = np.where(ok[..., None], normals / np.where(norms > 0, norms, 1.0), 0.0)
    normals = _orient_toward_sensor(normals, p)
    normals = np.where(ok[..., None], normals, 0.0)
    return NormalMap(normals, ok)


def estimate_normal_pca(
    cloud: OrganizedPointCloud, target_index: tuple[int, int], radius: float = 0.02
) -> np.ndarray:
    """Plane-fit normal at one pixel: eigenvector of the neighborhood
    covariance with the smallest eigenvalue, sensor-oriented.

    `target_index` is (row, col). The neighborhood is every valid point
    within `radius` meters of the target, gathered through a pixel-window
    prefilter sized from the local grid pitch.
    """
    r0, c0 = target_index
    if not (0 <= r0 < cloud.height and 0 <= c0 < cloud.width):
        raise InvalidInput("target index outside the grid")
    if not cloud.valid[r0, c0]:
        raise InvalidInput("target point is invalid")
    target = cloud.points[r0, c0]

    pitch = _local_pitch(cloud, r0, c0)
    if pitch is None:
        half = max(cloud.height, cloud.width)
    else:
        half = int(np.ceil(radius / pitch)) + 1
    rs = slice(max(0, r0 - half), min(cloud.height, r0 + half + 1))
    cs = slice(max(0, c0 - half), min(cloud.width, c0 + half + 1))
    patch = cloud.points[rs, cs][cloud.valid[rs, cs]]
    dist = np.linalg.norm(patch - target, axis=1)
    neighborhood = patch[dist <= radius]
    if neighborhood.shape[0] < 3:
        raise DegenerateNeighborhood(
            f"only {neighborhood.shape[0]} valid points within {radius} m"
        )

    centered = neighborhood - neighborhood.mean(axis=0)
    cov = centered.T @ centered / neighborhood.shape[0]
    eigvals, eigvecs = np.linalg.eigh(cov)
    if eigvals[1] <= 1e-12 * max(eigvals[2], 1e-300):
        raise DegenerateNeighborhood("neighborhood points are collinear")
    normal = eigvecs[:, 0]
    if normal @ target > 0:
        normal = -normal
    return normal / np.linalg.norm(normal)


def _local_pitch(cloud: OrganizedPointCloud, r0: int, c0: int) -> float | None:
    """Median spacing between the target and its valid 4-neighbors."""
    target = cloud.points[r0, c0]
    gaps = []
    for dr, dc in ((0, 1), (0, -1), (1, 0), (-1, 0)):
        r, c = r0 + dr, c0 + dc
        if 0 <= r < cloud.height and 0 <= c < cloud.width and cloud.valid[r, c]:
            gaps.append(np.linalg.norm(cloud.points[r, c] - target))
    gaps = [g for g in gaps if g > 0]
    return float(np.median(gaps)) if gaps else None
