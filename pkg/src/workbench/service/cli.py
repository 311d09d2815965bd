"""Command-line entry points for the workbench."""

from __future__ import annotations

import sys

import click
import numpy as np

from ..classify import classify as classify_query
from ..classify import load_patch_png, load_registry, toy_extract
from ..errors import WorkbenchError
from ..geometry.cloud import cloud_from_depth, load_depth_png
from ..geometry.normals import estimate_normals_integral
from ..geometry.synthetic import default_camera


@click.group()
def main():
    """Teach-and-execute workbench for a simulated compliant arm."""


@main.command()
@click.argument("scenario", type=click.Path(exists=True))
@click.option("--path", "path_file", required=True, type=click.Path(exists=True),
              help="YAML path spec (stroke or area).")
@click.option("--out", "output", required=True, type=click.Path(),
              help="Telemetry CSV destination.")
def run(scenario, path_file, output):
    """Execute a path spec against a scenario, headless."""
    from .headless import run_headless

    try:
        frames = run_headless(scenario, path_file, output)
    except WorkbenchError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"wrote {len(frames)} telemetry frames to {output}")


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--scenario", "scenario_file", required=True, type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(port, scenario_file, host):
    """Serve the wire API for the browser UI."""
    import uvicorn

    from .api import create_app
    from .scenario import load_scenario

    try:
        app = create_app(load_scenario(scenario_file))
    except WorkbenchError as exc:
        raise click.ClickException(str(exc)) from exc
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.argument("depth_png", type=click.Path(exists=True))
@click.option("--out", "output", required=True, type=click.Path(),
              help="Destination text file: x y z nx ny nz per valid pixel.")
def normals(depth_png, output):
    """Estimate surface normals for a 16-bit depth PNG."""
    try:
        depth = load_depth_png(depth_png)
        camera = default_camera(depth.shape[1], depth.shape[0])
        cloud = cloud_from_depth(depth, camera)
        normal_map = estimate_normals_integral(cloud)
    except WorkbenchError as exc:
        raise click.ClickException(str(exc)) from exc
    rows = np.argwhere(cloud.valid & normal_map.valid)
    with open(output, "w", encoding="utf-8") as fh:
        for r, c in rows:
            p = cloud.points[r, c]
            n = normal_map.normals[r, c]
            fh.write(" ".join(repr(float(v)) for v in (*p, *n)) + "\n")
    click.echo(f"wrote {len(rows)} oriented points to {output}")


@main.command(name="classify")
@click.option("--registry", "registry_file", required=True, type=click.Path(exists=True))
@click.option("--patch", "patch_file", required=True, type=click.Path(exists=True))
@click.option("--ratio-threshold", default=0.8, show_default=True)
def classify_cmd(registry_file, patch_file, ratio_threshold):
    """Classify a grayscale patch against a saved registry."""
    try:
        registry = load_registry(registry_file)
        feature = toy_extract(load_patch_png(patch_file))
        result = classify_query(registry, feature, ratio_threshold=ratio_threshold)
    except WorkbenchError as exc:
        raise click.ClickException(str(exc)) from exc
    ratio = "n/a" if result.ratio is None else f"{result.ratio:.4f}"
    click.echo(f"label: {result.label}  d1: {result.d1:.4f}  ratio: {ratio}")


if __name__ == "__main__":
    sys.exit(main())
