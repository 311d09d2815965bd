"""Boustrophedon stroke coverage of a user-selected polygon."""

from __future__ import annotations

import numpy as np
from shapely.geometry import LineString, Polygon

from ..errors import InvalidPolygon
from .cloud import Stroke2D


def area_to_strokes(polygon: Stroke2D, spacing: float = 4.0) -> list[Stroke2D]:
    """Cover a closed polygon with serpentine horizontal scan strokes.

    Scan lines run between the polygon's vertical extremes, evenly spaced at
    most `spacing` pixels apart, clipped to the polygon and alternating
    direction line to line. Returns an empty list for an empty interior.
    """
    if spacing < 1:
        raise InvalidPolygon("stroke spacing must be >= 1 px")
    pts = polygon.pixels
    if len(pts) >= 2 and np.allclose(pts[0], pts[-1]):
        pts = pts[:-1]
    if len(pts) < 3:
        raise InvalidPolygon("polygon needs at least 3 distinct vertices")
    shape = Polygon(pts)
    # shoelace area is 0 for both collinear rings and symmetric bowties;
    # buffer(0) repairs the ring so the two cases can be told apart
    if shape.buffer(0).area <= 0:
        return []
    if not shape.is_valid:
        raise InvalidPolygon("polygon is self-intersecting")

    xmin, ymin, xmax, ymax = shape.bounds
    n_lines = int(np.ceil((ymax - ymin) / spacing)) + 1
    ys = np.linspace(ymin, ymax, n_lines)

    strokes: list[Stroke2D] = []
    leftward = False
    for y in ys:
        scan = LineString([(xmin - 1.0, y), (xmax + 1.0, y)])
        clipped = shape.intersection(scan)
        segments = _as_segments(clipped)
        if not segments:
            continue
        segments.sort(key=lambda seg: min(seg[0][0], seg[1][0]), reverse=leftward)
        for (x0, y0), (x1, y1) in segments:
            if leftward == (x0 < x1):
                x0, x1 = x1, x0
                y0, y1 = y1, y0
            stroke = _rasterize((x0, y0), (x1, y1))
            if stroke is not None:
                strokes.append(stroke)
        leftward = not leftward
    return strokes


def _as_segments(geom) -> list:
    segments = []
    geoms = getattr(geom, "geoms", [geom])
    for g in geoms:
        if isinstance(g, LineString) and g.length > 0:
            coords = list(g.coords)
            segments.append((coords[0], coords[-1]))
    return segments


def _rasterize(start, end) -> Stroke2D | None:
    """Sample a segment at ~1 px steps (endpoints included)."""
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    length = np.linalg.norm(end - start)
    if length < 1e-9:
        return None
    n = max(2, int(np.ceil(length)) + 1)
    ts = np.linspace(0.0, 1.0, n)
    return Stroke2D(start[None, :] + ts[:, None] * (end - start)[None, :])
