from .headless import jitter_patches, run_headless
from .scenario import (
    SceneObject,
    Scenario,
    load_scenario,
    make_texture,
    render_depth,
    scenario_from_dict,
)
from .session import (
    Detection,
    Phase,
    ReachabilityResult,
    Session,
    StoredPath,
)
from .telemetry import (
    TELEMETRY_HEADER,
    TelemetryFrame,
    frames_to_csv,
    write_telemetry_csv,
)

__all__ = [
    "TELEMETRY_HEADER",
    "Detection",
    "Phase",
    "ReachabilityResult",
    "Scenario",
    "SceneObject",
    "Session",
    "StoredPath",
    "TelemetryFrame",
    "frames_to_csv",
    "jitter_patches",
    "load_scenario",
    "make_texture",
    "render_depth",
    "run_headless",
    "scenario_from_dict",
    "write_telemetry_csv",
]
