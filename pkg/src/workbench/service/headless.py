"""Headless execution: run one scenario + path specification to a CSV."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import yaml

from ..errors import InvalidInput, ScenarioError
from ..geometry.cloud import Stroke2D
from .scenario import Scenario, load_scenario
from .session import Session
from .telemetry import write_telemetry_csv


def jitter_patches(patch: np.ndarray, count: int, rng, sigma: float = 4.0):
    """Teaching samples: the texture plus small pixel noise."""
    base = patch.astype(float)
    return [
        np.clip(base + rng.normal(0.0, sigma, base.shape), 0, 255).astype(np.uint8)
        for _ in range(count)
    ]


def run_headless(scenario_source, path_source, output) -> list:
    """Load scenario + path spec, execute, and write the telemetry CSV.

    The path spec file is YAML with either `stroke: [[u, v], ...]` or
    `area: {polygon: [[u, v], ...], spacing: px}`, plus an optional
    `pair_with` object name (default: the scenario's first object)."""
    scenario = load_scenario(scenario_source) if not isinstance(
        scenario_source, Scenario
    ) else scenario_source
    try:
        spec = yaml.safe_load(Path(path_source).read_text())
    except yaml.YAMLError as exc:
        raise ScenarioError(f"unparseable path spec: {exc}") from exc
    if not isinstance(spec, dict) or ("stroke" not in spec and "area" not in spec):
        raise ScenarioError("path spec needs a 'stroke' or 'area' section")

    session = Session(id="headless", scenario=scenario)

    pair_with = spec.get("pair_with")
    if pair_with is None:
        if not scenario.objects:
            raise InvalidInput("scenario has no objects to pair the path with")
        pair_with = scenario.objects[0].name
    matches = [o for o in scenario.objects if o.name == pair_with]
    if not matches:
        raise InvalidInput(f"unknown object '{pair_with}'")
    rng = np.random.default_rng(scenario.seed)
    samples = int(spec.get("teach_samples", 20))
    session.teach_object(pair_with, jitter_patches(matches[0].patch, samples, rng))

    if "stroke" in spec:
        pixels = np.asarray(spec["stroke"], dtype=float)
        path_id = session.define_path(Stroke2D(pixels))
    else:
        area = spec["area"]
        polygon = np.asarray(area["polygon"], dtype=float)
        path_id = session.define_area(
            Stroke2D(polygon), spacing=float(area.get("spacing", 4.0))
        )

    session.pair_path(path_id, pair_with)
    frames = session.execute(path_id)
    if output is not None:
        write_telemetry_csv(output, frames)
    return frames
