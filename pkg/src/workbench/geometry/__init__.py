from .cloud import CameraModel, NormalMap, OrganizedPointCloud, Stroke2D
from .coverage import area_to_strokes
from .normals import estimate_normal_pca, estimate_normals_integral
from .path import Path3D, PathFrame, downsample_path, path_frames, tool_orientation
from .projection import project_stroke, reproject_path

__all__ = [
    "CameraModel",
    "NormalMap",
    "OrganizedPointCloud",
    "Stroke2D",
    "Path3D",
    "PathFrame",
    "area_to_strokes",
    "downsample_path",
    "estimate_normal_pca",
    "estimate_normals_integral",
    "path_frames",
    "project_stroke",
    "reproject_path",
    "tool_orientation",
]
