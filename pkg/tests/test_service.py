"""Scenario loading, session phase machine, execution, wire API, and CLI."""

import numpy as np
import pytest
import yaml
from fastapi.testclient import TestClient

from workbench.classify import UNKNOWN
from workbench.dynamics import forward_kinematics, solve_ik
from workbench.errors import (
    DuplicateClass,
    EmptySession,
    InvalidInput,
    PhaseError,
    ScenarioError,
    UnknownClass,
)
from workbench.geometry.cloud import Stroke2D
from workbench.geometry.path import Path3D, path_frames
from workbench.service import (
    TELEMETRY_HEADER,
    Phase,
    Session,
    StoredPath,
    frames_to_csv,
    jitter_patches,
    load_scenario,
    make_texture,
    render_depth,
    run_headless,
    scenario_from_dict,
)
from workbench.service.api import create_app

CAM_Z = 1.0
TABLE_Z = 0.14
DEPTH = CAM_Z - TABLE_Z  # nominal plane depth seen by the camera


def base_config(**overrides):
    cfg = {
        "version": 1,
        "seed": 3,
        "arm": {"viscous_friction": 0.0},
        "camera": {"width": 160, "height": 120, "position": [0.55, 0.0, CAM_Z]},
        "surface": {"kind": "plane", "z0": TABLE_Z},
        "gains": {"f_n": 10.0},
        "motion": {"v_max": 0.1, "a_max": 0.5},
        "objects": [
            {"name": "cup", "box": [10, 10, 34, 34], "texture": {"kind": "checker"}},
            {"name": "pen", "box": [60, 10, 84, 34], "texture": {"kind": "stripes"}},
        ],
    }
    cfg.update(overrides)
    return cfg


def stroke_pixels(length_m, count=30, v=59.5):
    """Horizontal image stroke centered on the camera axis, length in meters."""
    half = length_m / 2.0 * 120.0 / DEPTH
    us = np.linspace(79.5 - half, 79.5 + half, count)
    return np.stack([us, np.full_like(us, v)], axis=1)


@pytest.fixture(scope="module")
def scenario():
    return scenario_from_dict(base_config())


@pytest.fixture()
def session(scenario):
    return Session(id="t", scenario=scenario)


def teach_cup(session, count=10):
    rng = np.random.default_rng(0)
    patch = session.scenario.objects[0].patch
    return session.teach_object("cup", jitter_patches(patch, count, rng))


class TestScenario:
    def test_minimal_plane_loads_with_defaults(self, tmp_path):
        cfg = {"arm": {}, "camera": {}, "surface": {"kind": "plane"}}
        path = tmp_path / "s.yaml"
        path.write_text(yaml.safe_dump(cfg))
        scn = load_scenario(path)
        assert scn.model.dof == 7
        assert scn.depth.shape == (120, 160)
        assert scn.seed == 0

    def test_missing_arm_names_field(self, tmp_path):
        path = tmp_path / "s.yaml"
        path.write_text(yaml.safe_dump({"camera": {}, "surface": {"kind": "plane"}}))
        with pytest.raises(ScenarioError, match="arm"):
            load_scenario(path)

    def test_unknown_surface_kind(self):
        with pytest.raises(ScenarioError, match="surface.kind"):
            scenario_from_dict(base_config(surface={"kind": "donut"}))

    def test_sphere_cap_extents(self):
        """Cap apex and flat rim heights match the analytic geometry."""
        cfg = base_config(
            surface={
                "kind": "sphere-cap",
                "z0": TABLE_Z,
                "center": [0.55, 0.0, -0.26],
                "radius": 0.45,
            }
        )
        scn = scenario_from_dict(cfg)
        apex = scn.surface.height_at(0.55, 0.0)
        rim = scn.surface.height_at(0.55 + 0.4, 0.0)
        # bilinear grid at 5 mm pitch: sagitta error ~ res^2 / 8R ~ 1e-5
        assert apex == pytest.approx(-0.26 + 0.45, abs=1e-4)
        assert rim == pytest.approx(TABLE_Z, abs=1e-6)

    def test_render_depth_plane_oracle(self, scenario):
        """Every plane pixel is at camera height minus table height."""
        raw = render_depth(
            scenario.camera, 160, 120, lambda x, y: np.broadcast_to(TABLE_Z, np.shape(x))
        )
        assert np.allclose(raw, DEPTH, atol=1e-9)

    def test_depth_quantization_applied(self, scenario):
        steps = scenario.depth / 0.002
        assert np.allclose(steps, np.round(steps), atol=1e-9)

    def test_textures_deterministic_and_distinct(self):
        a = make_texture({"kind": "checker"})
        b = make_texture({"kind": "checker"})
        c = make_texture({"kind": "stripes"})
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_unknown_texture_kind(self):
        with pytest.raises(ScenarioError):
            make_texture({"kind": "plaid"})

    def test_duplicate_object_names(self):
        objs = [
            {"name": "cup", "box": [0, 0, 5, 5], "texture": {"kind": "checker"}},
            {"name": "cup", "box": [6, 6, 9, 9], "texture": {"kind": "stripes"}},
        ]
        with pytest.raises(ScenarioError):
            scenario_from_dict(base_config(objects=objs))


class TestTeachDetect:
    def test_teach_then_detect_labels_all(self, session):
        rng = np.random.default_rng(1)
        for obj in session.scenario.objects:
            session.teach_object(obj.name, jitter_patches(obj.patch, 10, rng))
        detections = session.detect_objects()
        assert [d.result.label for d in detections] == ["cup", "pen"]
        assert session.phase is Phase.DETECTION

    def test_untaught_object_is_unknown(self, session):
        teach_cup(session)
        # one taught class: absolute-threshold fallback decides
        labels = {d.result.label for d in session.detect_objects()}
        assert "cup" in labels
        rng = np.random.default_rng(2)
        session.teach_object("lid", jitter_patches(make_texture({"kind": "dots"}), 10, rng))
        labels = [d.result.label for d in session.detect_objects()]
        assert labels[0] == "cup"
        assert labels[1] == UNKNOWN  # stripes never taught

    def test_zero_patches_empty_session(self, session):
        with pytest.raises(EmptySession):
            session.teach_object("cup", [])

    def test_duplicate_name_surfaced(self, session):
        teach_cup(session)
        with pytest.raises(DuplicateClass):
            teach_cup(session)
        assert session.phase is Phase.DETECTION

    def test_empty_scene_empty_list(self):
        scn = scenario_from_dict(base_config(objects=[]))
        assert Session(id="e", scenario=scn).detect_objects() == []


class TestPaths:
    def test_define_path_builds_frames_on_surface(self, session):
        pid = session.define_path(Stroke2D(stroke_pixels(0.2)))
        assert session.phase is Phase.PATH_SPEC
        frames = session.paths[pid].frames
        assert len(frames) >= 2
        for f in frames:
            assert f.p[2] == pytest.approx(TABLE_Z, abs=0.005)
            assert f.n @ [0, 0, 1] > 0.99

    def test_delete_path(self, session):
        pid = session.define_path(Stroke2D(stroke_pixels(0.2)))
        session.delete_path(pid)
        assert pid not in session.paths
        with pytest.raises(InvalidInput):
            session.delete_path(pid)

    def test_pair_unpair_and_replace(self, session):
        teach_cup(session)
        pid = session.define_path(Stroke2D(stroke_pixels(0.2)))
        session.pair_path(pid, "cup")
        assert session.pairings[pid] == "cup"
        session.pair_path(pid, "pen")  # scenario object, re-pairing replaces
        assert session.pairings[pid] == "pen"
        session.pair_path(pid, None)
        assert pid not in session.pairings

    def test_pair_unknown_object(self, session):
        pid = session.define_path(Stroke2D(stroke_pixels(0.2)))
        with pytest.raises(UnknownClass):
            session.pair_path(pid, "ghost")
        with pytest.raises(InvalidInput):
            session.pair_path("path-99", "cup")

    def test_define_area_includes_lift_transitions(self, session):
        # a 20x12-pixel rectangle produces several serpentine strokes
        polygon = np.array([[70.0, 54.0], [90.0, 54.0], [90.0, 66.0], [70.0, 66.0]])
        pid = session.define_area(Stroke2D(polygon), spacing=4.0)
        frames = session.paths[pid].frames
        heights = np.array([f.p[2] for f in frames])
        assert heights.max() > TABLE_Z + 0.015  # lifted waypoints present
        assert (np.abs(heights - TABLE_Z) < 0.005).sum() > len(frames) * 0.5


class TestReachability:
    def test_path_near_start_pose_reachable(self, session):
        pid = session.define_path(Stroke2D(stroke_pixels(0.2)))
        assert session.check_reachability(pid).reachable

    def test_far_path_unreachable_at_first_frame(self, session):
        pts = np.array([[3.0, 0.0, 0.14], [3.1, 0.0, 0.14], [3.2, 0.0, 0.14]])
        normals = np.tile([0.0, 0.0, 1.0], (3, 1))
        far = StoredPath(
            id="far", frames=path_frames(Path3D(pts, normals)), pixels=np.zeros((3, 2)),
            kind="stroke",
        )
        session.paths["far"] = far
        result = session.check_reachability("far")
        assert not result.reachable
        assert result.first_unreachable == 0

    def test_ik_fk_round_trip(self, scenario):
        """Perturbed reachable poses: FK(IK(x)) within 1e-3 m."""
        model = scenario.model
        rng = np.random.default_rng(11)
        q0 = scenario.start_q
        pose0 = forward_kinematics(model, q0).pose
        for _ in range(10):
            offset = rng.uniform(-0.05, 0.05, 3)
            target = pose0.__class__(pose0.rotation, pose0.translation + offset)
            result = solve_ik(model, target, q0)
            assert result.converged
            reached = forward_kinematics(model, result.q).pose.translation
            assert np.linalg.norm(reached - target.translation) < 1e-3


class TestPhaseMachine:
    def test_execute_requires_path_spec_phase(self, session):
        with pytest.raises(PhaseError):
            session.execute("path-1")

    def test_execute_requires_pairing(self, session):
        pid = session.define_path(Stroke2D(stroke_pixels(0.1)))
        with pytest.raises(InvalidInput, match="not paired"):
            session.execute(pid)

    def test_transitions_are_logged(self, session):
        teach_cup(session)
        session.define_path(Stroke2D(stroke_pixels(0.1)))
        steps = [(a, b) for a, b, _ in session.transitions]
        assert ("Detection", "Teaching") in steps
        assert ("Teaching", "Detection") in steps
        assert ("Detection", "PathSpec") in steps

    def test_saturation_fault(self, scenario):
        cfg = base_config(gains={"f_n": 10.0, "torque_limit": 1.0})
        scn = scenario_from_dict(cfg)
        s = Session(id="f", scenario=scn)
        teach_cup(s)
        pid = s.define_path(Stroke2D(stroke_pixels(0.05)))
        s.pair_path(pid, "cup")
        s.execute(pid)
        assert s.phase is Phase.FAULT
        assert "saturated" in s.fault_reason
        assert ("Executing", "Fault") in [(a, b) for a, b, _ in s.transitions]
        s.reset_to_path_spec()
        assert s.phase is Phase.PATH_SPEC


@pytest.fixture(scope="module")
def executed():
    scn = scenario_from_dict(base_config())
    s = Session(id="x", scenario=scn)
    teach_cup(s)
    pid = s.define_path(Stroke2D(stroke_pixels(0.08)))
    s.pair_path(pid, "cup")
    frames = s.execute(pid)
    return s, frames


class TestExecution:

    def test_completes_to_done(self, executed):
        s, frames = executed
        assert s.phase is Phase.DONE
        assert s.fault_reason is None
        assert len(frames) > 100

    def test_telemetry_monotone_and_decimated(self, executed):
        _, frames = executed
        ts = np.array([f.t for f in frames])
        assert np.all(np.diff(ts) > 0)
        assert np.allclose(np.diff(ts), 0.01, atol=1e-9)

    def test_force_regulated_after_settle(self, executed):
        _, frames = executed
        late = [f for f in frames if f.t > 2.5]
        fn = np.array([f.fn_meas for f in late])
        assert abs(fn.mean() - 10.0) / 10.0 < 0.05
        assert all(f.contact for f in late)

    def test_csv_format(self, executed):
        _, frames = executed
        csv = frames_to_csv(frames)
        lines = csv.strip().split("\n")
        assert lines[0] == TELEMETRY_HEADER
        assert lines[0].startswith("t,q0,")
        assert len(lines[1].split(",")) == 21

    def test_deterministic_replay(self, tmp_path):
        """Same scenario + seed + commands: byte-identical telemetry."""
        cfg = base_config()
        spec = {"stroke": stroke_pixels(0.03, count=10).tolist(), "pair_with": "cup"}
        scenario_file = tmp_path / "scenario.yaml"
        scenario_file.write_text(yaml.safe_dump(cfg))
        spec_file = tmp_path / "path.yaml"
        spec_file.write_text(yaml.safe_dump(spec))
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        run_headless(scenario_file, spec_file, out1)
        run_headless(scenario_file, spec_file, out2)
        assert out1.read_bytes() == out2.read_bytes()
        assert out1.read_text().splitlines()[0] == TELEMETRY_HEADER


@pytest.fixture(scope="module")
def client():
    scn = scenario_from_dict(base_config())
    return TestClient(create_app(scn))


class TestWireApi:

    def test_session_lifecycle(self, client):
        sid = client.post("/sessions").json()["id"]
        status = client.get(f"/sessions/{sid}").json()
        assert status["phase"] == "Detection"
        assert client.get("/sessions/nope").status_code == 404

    def test_scene_frame_is_png(self, client):
        sid = client.post("/sessions").json()["id"]
        r = client.get(f"/sessions/{sid}/scene")
        assert r.status_code == 200
        assert r.content[:8] == b"\x89PNG\r\n\x1a\n"

    def test_teach_detect_flow(self, client):
        sid = client.post("/sessions").json()["id"]
        patch = make_texture({"kind": "checker"})
        rng = np.random.default_rng(0)
        patches = [p.tolist() for p in jitter_patches(patch, 8, rng)]
        r = client.post(f"/sessions/{sid}/teach", json={"name": "cup", "patches": patches})
        assert r.status_code == 200
        assert r.json()["sample_count"] == 8
        detections = client.get(f"/sessions/{sid}/detections").json()
        assert detections[0]["label"] == "cup"

    def test_duplicate_teach_is_400(self, client):
        sid = client.post("/sessions").json()["id"]
        patch = make_texture({"kind": "checker"}).tolist()
        body = {"name": "cup", "patches": [patch, patch]}
        assert client.post(f"/sessions/{sid}/teach", json=body).status_code == 200
        assert client.post(f"/sessions/{sid}/teach", json=body).status_code == 400

    def test_stroke_echo_round_trip(self, client):
        sid = client.post("/sessions").json()["id"]
        pixels = stroke_pixels(0.1).tolist()
        r = client.post(f"/sessions/{sid}/paths", json={"pixels": pixels})
        assert r.status_code == 200
        assert r.json()["pixels"] == pixels

    def test_full_run_over_wire(self, client):
        sid = client.post("/sessions").json()["id"]
        patch = make_texture({"kind": "checker"})
        rng = np.random.default_rng(0)
        patches = [p.tolist() for p in jitter_patches(patch, 5, rng)]
        client.post(f"/sessions/{sid}/teach", json={"name": "cup", "patches": patches})
        pid = client.post(
            f"/sessions/{sid}/paths", json={"pixels": stroke_pixels(0.03, count=10).tolist()}
        ).json()["path_id"]
        reach = client.get(f"/sessions/{sid}/reachability/{pid}").json()
        assert reach["reachable"]
        client.post(f"/sessions/{sid}/pair", json={"path_id": pid, "object": "cup"})
        r = client.post(f"/sessions/{sid}/execute", json={"path_id": pid})
        assert r.status_code == 200
        assert r.json()["phase"] == "Done"
        stream = client.get(f"/sessions/{sid}/telemetry")
        lines = stream.text.strip().split("\n")
        assert lines[0] == TELEMETRY_HEADER
        assert len(lines) == r.json()["frames"] + 1

    def test_execute_unpaired_is_400(self, client):
        sid = client.post("/sessions").json()["id"]
        pid = client.post(
            f"/sessions/{sid}/paths", json={"pixels": stroke_pixels(0.05).tolist()}
        ).json()["path_id"]
        assert (
            client.post(f"/sessions/{sid}/execute", json={"path_id": pid}).status_code == 400
        )


class TestCli:
    def test_normals_command(self, tmp_path):
        from click.testing import CliRunner

        from workbench.geometry.cloud import save_depth_png
        from workbench.service.cli import main

        depth = np.full((40, 50), 0.9)
        png = tmp_path / "depth.png"
        save_depth_png(png, depth)
        out = tmp_path / "normals.xyzn"
        result = CliRunner().invoke(main, ["normals", str(png), "--out", str(out)])
        assert result.exit_code == 0, result.output
        rows = np.loadtxt(out)
        assert rows.shape[1] == 6
        # flat scene viewed along +z: every normal points back at the sensor
        assert np.allclose(rows[:, 3:], [0, 0, -1], atol=1e-6)

    def test_classify_command(self, tmp_path):
        from click.testing import CliRunner

        from workbench.classify import (
            ClassRegistry,
            add_sample,
            begin_teaching,
            finalize_class,
            save_patch_png,
            save_registry,
            toy_extract,
        )
        from workbench.service.cli import main

        reg = ClassRegistry()
        for name, kind in [("cup", "checker"), ("pen", "stripes")]:
            s = begin_teaching(reg, name, target_samples=1)
            add_sample(s, toy_extract(make_texture({"kind": kind})))
            finalize_class(reg, s)
        reg_file = tmp_path / "reg.json"
        save_registry(reg, reg_file)
        patch_file = tmp_path / "patch.png"
        save_patch_png(patch_file, make_texture({"kind": "checker"}))
        result = CliRunner().invoke(
            main, ["classify", "--registry", str(reg_file), "--patch", str(patch_file)]
        )
        assert result.exit_code == 0, result.output
        assert "label: cup" in result.output

    def test_run_command(self, tmp_path):
        from click.testing import CliRunner

        from workbench.service.cli import main

        scenario_file = tmp_path / "scenario.yaml"
        scenario_file.write_text(yaml.safe_dump(base_config()))
        spec_file = tmp_path / "path.yaml"
        spec_file.write_text(
            yaml.safe_dump({"stroke": stroke_pixels(0.03, count=10).tolist()})
        )
        out = tmp_path / "run.csv"
        result = CliRunner().invoke(
            main, ["run", str(scenario_file), "--path", str(spec_file), "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        lines = out.read_text().strip().split("\n")
        assert lines[0] == TELEMETRY_HEADER
        assert len(lines) > 100
