from .surface import SurfaceModel, ToolGeometry, contact_wrench, surface_from_cloud

__all__ = ["SurfaceModel", "ToolGeometry", "contact_wrench", "surface_from_cloud"]
