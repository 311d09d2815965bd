"""Scenario files: the full description of one workbench setup.

A scenario bundles the arm, an overhead depth camera, an analytic surface
(plane, sphere cap, or wave) or a depth image, contact parameters, control
gains, and the objects present on the table. Loading produces ready-to-use
artifacts: the rendered (quantized) depth image, organized cloud, normal
map, contact height field, and gain set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import yaml

from ..classify import ClassRegistry
from ..contact.surface import SurfaceModel
from ..control import ControlGains, SpeedProfile, critically_damped
from ..dynamics import ArmModel, default_arm, task_space_mass
from ..errors import ScenarioError
from ..geometry.cloud import CameraModel, NormalMap, OrganizedPointCloud, cloud_from_depth
from ..geometry.cloud import load_depth_png
from ..geometry.normals import estimate_normals_integral
from ..transforms import RigidTransform

SCHEMA_VERSION = 1
DEFAULT_QUANTIZATION = 0.002  # m, depth sensor quantization
SURFACE_GRID_RESOLUTION = 0.005  # m, contact height-field pitch

# camera looks straight down: sensor x -> base x, sensor y -> base -y,
# sensor z (depth) -> base -z
_DOWNWARD = np.array([[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]])


@dataclass(frozen=True)
class SceneObject:
    """A tabletop object: ground-truth image box plus its texture patch."""

    name: str
    box: tuple[int, int, int, int]  # (u0, v0, u1, v1) pixels
    patch: np.ndarray  # 2-D grayscale


@dataclass(frozen=True)
class Scenario:
    """Loaded scenario with all derived artifacts."""

    model: ArmModel
    start_q: np.ndarray
    camera: CameraModel
    depth: np.ndarray
    cloud: OrganizedPointCloud
    normal_map: NormalMap
    surface: SurfaceModel
    gains: ControlGains
    profile: SpeedProfile
    objects: tuple[SceneObject, ...]
    seed: int
    tau_noise_std: float
    height_fn: object = field(repr=False)  # (x, y) -> z in base frame
    path_spacing: float = 0.01


def _require(config: dict, key: str, context: str) -> object:
    if key not in config:
        where = f"{context}.{key}" if context else key
        raise ScenarioError(f"missing required field '{where}'")
    return config[key]


def make_texture(spec: dict, size: int = 24) -> np.ndarray:
    """Deterministic synthetic grayscale texture from a small spec dict."""
    kind = spec.get("kind", "checker")
    yy, xx = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    if kind == "checker":
        period = int(spec.get("period", 3))
        img = ((xx // period + yy // period) % 2) * 255
    elif kind == "stripes":
        period = int(spec.get("period", 4))
        phase = float(spec.get("phase", 0.0))
        img = (np.sin(2 * np.pi * xx / period + phase) * 0.5 + 0.5) * 255
    elif kind == "ramp":
        axis = spec.get("axis", "x")
        base = xx if axis == "x" else yy
        img = base / (size - 1) * 255
    elif kind == "noise":
        rng = np.random.default_rng(int(spec.get("seed", 0)))
        img = rng.integers(0, 256, size=(size, size))
    elif kind == "dots":
        period = int(spec.get("period", 6))
        img = (((xx % period) < 2) & ((yy % period) < 2)) * 255
    else:
        raise ScenarioError(f"objects[].texture.kind: unknown kind '{kind}'")
    return np.asarray(img, dtype=np.uint8)


def _build_height_fn(surface_cfg: dict):
    """Analytic base-frame height z(x, y) from the surface section."""
    kind = _require(surface_cfg, "kind", "surface")
    z0 = float(surface_cfg.get("z0", 0.14))
    if kind == "plane":
        return lambda x, y: np.broadcast_to(np.float64(z0), np.shape(x)).copy()
    if kind == "sphere-cap":
        center = np.asarray(_require(surface_cfg, "center", "surface"), dtype=float)
        radius = float(_require(surface_cfg, "radius", "surface"))
        if center.shape != (3,) or radius <= 0:
            raise ScenarioError("surface.center must be a 3-vector and surface.radius > 0")

        def height(x, y):
            x = np.asarray(x, dtype=float)
            y = np.asarray(y, dtype=float)
            rho2 = (x - center[0]) ** 2 + (y - center[1]) ** 2
            cap = center[2] + np.sqrt(np.maximum(radius**2 - rho2, 0.0))
            return np.maximum(np.where(rho2 < radius**2, cap, z0), z0)

        return height
    if kind == "wave":
        amplitude = float(surface_cfg.get("amplitude", 0.01))
        wavelength = float(surface_cfg.get("wavelength", 0.3))
        if wavelength <= 0:
            raise ScenarioError("surface.wavelength must be > 0")
        return lambda x, y: z0 + amplitude * np.sin(
            2.0 * np.pi * np.asarray(x, dtype=float) / wavelength
        )
    raise ScenarioError(f"surface.kind: unknown kind '{kind}' (plane | sphere-cap | wave)")


def render_depth(camera: CameraModel, width: int, height: int, height_fn) -> np.ndarray:
    """Ray-cast the analytic surface into a depth image.

    Per pixel the depth d solves cam_z - d = z(x0 + rx d, y0 - ry d); a few
    fixed-point sweeps converge for the gentle surfaces used here."""
    t = camera.sensor_to_base.translation
    us, vs = np.meshgrid(np.arange(width, dtype=float), np.arange(height, dtype=float))
    rx = (us - camera.cx) / camera.fx
    ry = (vs - camera.cy) / camera.fy
    d = np.full((height, width), t[2] * 0.5)
    for _ in range(25):
        z = height_fn(t[0] + rx * d, t[1] - ry * d)
        d = t[2] - z
    if np.any(d <= 0):
        raise ScenarioError("surface.z0: surface must lie below the camera")
    return d


def _load_objects(entries, base_dir) -> tuple[SceneObject, ...]:
    objects = []
    for i, entry in enumerate(entries or []):
        ctx = f"objects[{i}]"
        name = _require(entry, "name", ctx)
        box = tuple(int(v) for v in _require(entry, "box", ctx))
        if len(box) != 4:
            raise ScenarioError(f"{ctx}.box must be [u0, v0, u1, v1]")
        if "texture" in entry:
            patch = make_texture(entry["texture"])
        elif "patch" in entry:
            from ..classify import load_patch_png

            patch = load_patch_png(base_dir / entry["patch"] if base_dir else entry["patch"])
        else:
            raise ScenarioError(f"{ctx}: needs 'texture' or 'patch'")
        objects.append(SceneObject(name=name, box=box, patch=patch))
    names = [o.name for o in objects]
    if len(set(names)) != len(names):
        raise ScenarioError("objects[].name must be unique")
    return tuple(objects)


def scenario_from_dict(config: dict, base_dir=None) -> Scenario:
    if not isinstance(config, dict):
        raise ScenarioError("scenario must be a mapping")
    version = config.get("version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"version: unsupported schema version {version}")

    arm_cfg = _require(config, "arm", "")
    camera_cfg = _require(config, "camera", "")
    surface_cfg = _require(config, "surface", "")

    model = default_arm(viscous_friction=float(arm_cfg.get("viscous_friction", 0.5)))
    start_q = np.asarray(
        arm_cfg.get("start_q", [0.0, 0.9, 0.0, 1.6, 0.0, np.pi - 2.5, np.pi / 2]),
        dtype=float,
    )
    if start_q.shape != (model.dof,):
        raise ScenarioError(f"arm.start_q must have {model.dof} entries")

    width = int(camera_cfg.get("width", 160))
    height = int(camera_cfg.get("height", 120))
    position = np.asarray(camera_cfg.get("position", [0.55, 0.0, 1.0]), dtype=float)
    if position.shape != (3,):
        raise ScenarioError("camera.position must be a 3-vector")
    fx = float(camera_cfg.get("fx", 120.0))
    fy = float(camera_cfg.get("fy", fx))
    camera = CameraModel(
        fx=fx,
        fy=fy,
        cx=(width - 1) / 2.0,
        cy=(height - 1) / 2.0,
        sensor_to_base=RigidTransform(_DOWNWARD, position),
    )

    quantization = float(surface_cfg.get("quantization", DEFAULT_QUANTIZATION))
    if surface_cfg.get("kind") == "depth-image":
        depth_file = _require(surface_cfg, "file", "surface")
        depth = load_depth_png(base_dir / depth_file if base_dir else depth_file)
        if depth.shape != (height, width):
            raise ScenarioError("surface.file: depth image size mismatches camera")
        cloud = cloud_from_depth(depth, camera)
        from ..contact.surface import surface_from_cloud

        contact_cfg = dict(config.get("contact", {}))
        surface = surface_from_cloud(cloud, camera, contact_params=contact_cfg)
        height_fn = lambda x, y: surface.height_at(float(x), float(y))  # noqa: E731
    else:
        height_fn = _build_height_fn(surface_cfg)
        depth = render_depth(camera, width, height, height_fn)
        if quantization > 0:
            depth = np.round(depth / quantization) * quantization
        cloud = cloud_from_depth(depth, camera)
        contact_cfg = dict(config.get("contact", {}))
        pts = camera.sensor_to_base.apply(cloud.points[cloud.valid])
        margin = 0.05
        xs = np.arange(
            pts[:, 0].min() - margin, pts[:, 0].max() + margin, SURFACE_GRID_RESOLUTION
        )
        ys = np.arange(
            pts[:, 1].min() - margin, pts[:, 1].max() + margin, SURFACE_GRID_RESOLUTION
        )
        gx, gy = np.meshgrid(xs, ys)
        surface = SurfaceModel(xs, ys, height_fn(gx, gy), **contact_cfg)

    normal_map = estimate_normals_integral(cloud)

    gains_cfg = dict(config.get("gains", {}))
    k_diag = np.asarray(
        gains_cfg.pop("K_diag", [1000.0, 50.0, 1000.0, 50.0, 50.0, 50.0]), dtype=float
    )
    if "D_diag" in gains_cfg:
        d_diag = np.asarray(gains_cfg.pop("D_diag"), dtype=float)
    else:
        # critical damping at the start posture, path frame aligned with base
        basis = np.column_stack([[1.0, 0, 0], [0.0, 0, 1], [0.0, -1, 0]])
        d_diag = critically_damped(k_diag, task_space_mass(model, start_q), basis)
    try:
        gains = ControlGains(K_diag=k_diag, D_diag=d_diag, **gains_cfg)
    except TypeError as exc:
        raise ScenarioError(f"gains: {exc}") from exc

    motion_cfg = config.get("motion", {})
    profile = SpeedProfile(
        v_max=float(motion_cfg.get("v_max", 0.05)), a_max=float(motion_cfg.get("a_max", 0.25))
    )

    noise_cfg = config.get("noise", {})
    return Scenario(
        model=model,
        start_q=start_q,
        camera=camera,
        depth=depth,
        cloud=cloud,
        normal_map=normal_map,
        surface=surface,
        gains=gains,
        profile=profile,
        objects=_load_objects(config.get("objects"), base_dir),
        seed=int(config.get("seed", 0)),
        tau_noise_std=float(noise_cfg.get("tau_std", 0.05)),
        height_fn=height_fn,
        path_spacing=float(config.get("path_spacing", 0.01)),
    )


def load_scenario(source) -> Scenario:
    """Parse and build a scenario from a YAML file path."""
    from pathlib import Path

    path = Path(source)
    try:
        config = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ScenarioError(f"unparseable scenario file: {exc}") from exc
    return scenario_from_dict(config, base_dir=path.parent)


def new_registry(scenario: Scenario) -> ClassRegistry:
    from ..classify import FEATURE_DIM

    return ClassRegistry(dim=FEATURE_DIM)
