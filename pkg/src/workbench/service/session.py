"""Session orchestration: teach, detect, specify paths, execute.

A session owns one simulated arm plus the taught class registry and walks
the phase machine Detection -> PathSpec -> Executing -> Done/Fault, with
Teaching as a transient during sample collection. Executing runs the 1 kHz
hybrid-control loop against the scenario's penalty surface and records
decimated telemetry.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from ..classify import (
    ClassificationResult,
    ClassRecord,
    ClassRegistry,
    FEATURE_DIM,
    add_sample,
    begin_teaching,
    classify,
    finalize_class,
    toy_extract,
)
from ..contact.surface import contact_wrench
from ..control import HybridController, MotionTarget, profile_duration, track_path
from ..dynamics import JointState, forward_kinematics, jacobian, solve_ik, step
from ..errors import InvalidInput, PhaseError, UnknownClass, WorkbenchError
from ..geometry.cloud import Stroke2D
from ..geometry.coverage import area_to_strokes
from ..geometry.path import Path3D, PathFrame, downsample_path, path_frames
from ..geometry.projection import project_stroke
from ..transforms import RigidTransform
from .scenario import Scenario
from .telemetry import TelemetryFrame

logger = logging.getLogger(__name__)

DT = 1e-3
TELEMETRY_DECIMATION = 10  # record every 10 ms
APPROACH_TIME = 1.5  # s of impedance-only approach before path tracking
APPROACH_LIFT = 0.01  # m above the first frame at the start of the approach
SETTLE_TIME = 0.6  # s hovering at the lifted pose before descending
DESCEND_TIME = 0.6  # s to lower the target from the lift onto the surface
PRELOAD_DEPTH = 0.002  # m the impedance target sits below the sensed surface
HOLD_TIME = 0.3  # s of regulation after the path ends
FAULT_WINDOW = 0.5  # s of continuous saturation or contact loss
FORCE_RAMP_TIME = 0.5  # s ramp of the force setpoint after loop activation
STROKE_LIFT = 0.02  # m lift between area strokes
LIFT_SKEW = 0.002  # m tangential offset keeping lift tangents well-defined


class Phase(str, Enum):
    TEACHING = "Teaching"
    DETECTION = "Detection"
    PATH_SPEC = "PathSpec"
    EXECUTING = "Executing"
    DONE = "Done"
    FAULT = "Fault"


@dataclass(frozen=True)
class StoredPath:
    id: str
    frames: list[PathFrame]
    pixels: np.ndarray  # the 2-D input as submitted, echoed to clients
    kind: str  # "stroke" | "area"


@dataclass(frozen=True)
class Detection:
    box: tuple[int, int, int, int]
    result: ClassificationResult


@dataclass(frozen=True)
class ReachabilityResult:
    reachable: bool
    first_unreachable: int | None = None


@dataclass
class Session:
    """One user's workbench: scenario, registry, paths, and phase."""

    id: str
    scenario: Scenario
    registry: ClassRegistry = field(default_factory=lambda: ClassRegistry(dim=FEATURE_DIM))
    phase: Phase = Phase.DETECTION
    paths: dict = field(default_factory=dict)
    pairings: dict = field(default_factory=dict)
    telemetry: list = field(default_factory=list)
    transitions: list = field(default_factory=list)
    fault_reason: str | None = None
    _counter: int = 0
    _lock: threading.RLock = field(default_factory=threading.RLock, repr=False)

    # -- phase machine -------------------------------------------------

    def _transition(self, new_phase: Phase, note: str = "") -> None:
        old = self.phase
        self.phase = new_phase
        self.transitions.append((old.value, new_phase.value, note))
        logger.info("session %s: %s -> %s %s", self.id, old.value, new_phase.value, note)

    def _require_phase(self, *allowed: Phase) -> None:
        if self.phase not in allowed:
            raise PhaseError(
                f"operation requires phase in {[p.value for p in allowed]}, "
                f"session is {self.phase.value}"
            )

    def reset_to_path_spec(self) -> None:
        """Return from a finished or faulted run to path specification."""
        with self._lock:
            self._require_phase(Phase.DONE, Phase.FAULT)
            self.fault_reason = None
            self._transition(Phase.PATH_SPEC, "reset")

    # -- teaching and detection -----------------------------------------

    def teach_object(self, name: str, patches) -> ClassRecord:
        """Extract features from every patch and commit the class."""
        with self._lock:
            self._require_phase(Phase.DETECTION, Phase.PATH_SPEC)
            entered_from = self.phase
            self._transition(Phase.TEACHING, f"teach '{name}'")
            try:
                teaching = begin_teaching(self.registry, name, target_samples=max(len(patches), 1))
                for patch in patches:
                    add_sample(teaching, toy_extract(patch))
                record = finalize_class(self.registry, teaching)
            finally:
                self._transition(entered_from, f"taught '{name}'" if name in self.registry else "teach failed")
            return record

    def detect_objects(self) -> list[Detection]:
        """Classify every ground-truth scene box against the registry."""
        with self._lock:
            detections = []
            for obj in self.scenario.objects:
                result = classify(self.registry, toy_extract(obj.patch))
                detections.append(Detection(box=obj.box, result=result))
            return detections

    # -- path specification ---------------------------------------------

    def _next_path_id(self) -> str:
        self._counter += 1
        return f"path-{self._counter}"

    def _project(self, stroke: Stroke2D) -> Path3D:
        scn = self.scenario
        path = project_stroke(stroke, scn.cloud, scn.camera, scn.normal_map)
        return downsample_path(path, min_spacing=scn.path_spacing)

    def define_path(self, stroke: Stroke2D) -> str:
        with self._lock:
            self._require_phase(Phase.DETECTION, Phase.PATH_SPEC)
            frames = path_frames(self._project(stroke))
            path_id = self._next_path_id()
            self.paths[path_id] = StoredPath(
                id=path_id, frames=frames, pixels=stroke.pixels.copy(), kind="stroke"
            )
            if self.phase is not Phase.PATH_SPEC:
                self._transition(Phase.PATH_SPEC, f"defined {path_id}")
            return path_id

    def define_area(self, polygon: Stroke2D, spacing: float = 4.0) -> str:
        """Serpentine coverage of a pixel polygon, with lift transitions."""
        with self._lock:
            self._require_phase(Phase.DETECTION, Phase.PATH_SPEC)
            strokes = area_to_strokes(polygon, spacing=spacing)
            if not strokes:
                raise InvalidInput("area polygon covers no pixels")
            segments = [self._project(s) for s in strokes]
            points, normals = list(segments[0].points), list(segments[0].normals)
            for seg in segments[1:]:
                pe, ne = points[-1], normals[-1]
                ps, ns = seg.points[0], seg.normals[0]
                # lift, traverse, re-approach; skewed so no leg is parallel
                # to the surface normal (tangents stay well-defined)
                delta = ps - pe
                lateral = delta - (delta @ ne) * ne
                norm = np.linalg.norm(lateral)
                direction = lateral / norm if norm > 1e-9 else np.zeros(3)
                points.append(pe + STROKE_LIFT * ne + LIFT_SKEW * direction)
                normals.append(ne)
                points.append(ps + STROKE_LIFT * ns - LIFT_SKEW * direction)
                normals.append(ns)
                points.extend(seg.points)
                normals.extend(seg.normals)
            frames = path_frames(Path3D(np.array(points), np.array(normals)))
            path_id = self._next_path_id()
            self.paths[path_id] = StoredPath(
                id=path_id, frames=frames, pixels=polygon.pixels.copy(), kind="area"
            )
            if self.phase is not Phase.PATH_SPEC:
                self._transition(Phase.PATH_SPEC, f"defined {path_id}")
            return path_id

    def delete_path(self, path_id: str) -> None:
        with self._lock:
            if path_id not in self.paths:
                raise InvalidInput(f"unknown path '{path_id}'")
            del self.paths[path_id]
            self.pairings.pop(path_id, None)

    def pair_path(self, path_id: str, object_name: str | None) -> None:
        """Pair a path with a taught object; None unpairs."""
        with self._lock:
            if path_id not in self.paths:
                raise InvalidInput(f"unknown path '{path_id}'")
            if object_name is None:
                self.pairings.pop(path_id, None)
                return
            known = {obj.name for obj in self.scenario.objects} | set(self.registry.names)
            if object_name not in known:
                raise UnknownClass(object_name)
            self.pairings[path_id] = object_name

    # -- reachability and execution ---------------------------------------

    def check_reachability(self, path_id: str) -> ReachabilityResult:
        """Damped-least-squares IK swept along the path frames."""
        with self._lock:
            if path_id not in self.paths:
                raise InvalidInput(f"unknown path '{path_id}'")
            frames = self.paths[path_id].frames
            q = self.scenario.start_q.copy()
            for i, frame in enumerate(frames):
                target = RigidTransform(frame.tool_rotation, frame.p)
                result = solve_ik(self.scenario.model, target, q)
                if not result.converged:
                    return ReachabilityResult(reachable=False, first_unreachable=i)
                q = result.q
            return ReachabilityResult(reachable=True)

    def execute(self, path_id: str, full_rate: bool = False) -> list[TelemetryFrame]:
        """Approach the path start, then run the 1 kHz hybrid loop along it.

        Faults (phase -> Fault) on > 0.5 s of continuous torque saturation,
        or > 0.5 s of lost contact after first touch. Telemetry is recorded
        every 10 ms unless `full_rate`."""
        with self._lock:
            self._require_phase(Phase.PATH_SPEC)
            if path_id not in self.paths:
                raise InvalidInput(f"unknown path '{path_id}'")
            if path_id not in self.pairings:
                raise InvalidInput(f"path '{path_id}' is not paired with an object")
            reach = self.check_reachability(path_id)
            if not reach.reachable:
                raise InvalidInput(
                    f"path '{path_id}' unreachable at frame {reach.first_unreachable}"
                )
            self._transition(Phase.EXECUTING, path_id)
            try:
                frames_out, fault = self._run_loop(self.paths[path_id].frames, full_rate)
            except WorkbenchError as exc:
                self.fault_reason = str(exc)
                self._transition(Phase.FAULT, str(exc))
                raise
            self.telemetry = frames_out
            if fault:
                self.fault_reason = fault
                self._transition(Phase.FAULT, fault)
            else:
                self._transition(Phase.DONE, path_id)
            return frames_out

    def _run_loop(self, frames: list[PathFrame], full_rate: bool):
        scn = self.scenario
        model = scn.model
        rng = np.random.default_rng(scn.seed)
        controller = HybridController(scn.gains, DT)
        state = JointState(scn.start_q.copy(), np.zeros(model.dof))

        first = frames[0]
        duration = profile_duration(frames, scn.profile)
        # During the approach the normal direction is position-controlled:
        # stiffen it to the tangential level so the descend actually reaches
        # the surface, then hand the direction over to the force loop.
        k_app = scn.gains.K_diag.copy()
        d_app = scn.gains.D_diag.copy()
        if k_app[1] > 0:
            d_app[1] *= float(np.sqrt(k_app[0] / k_app[1]))
        k_app[1] = k_app[0]
        approach_gains = replace(scn.gains, K_diag=k_app, D_diag=d_app)
        n_steps = int(round((APPROACH_TIME + duration + HOLD_TIME) / DT))
        fault_steps = int(FAULT_WINDOW / DT)
        decimation = 1 if full_rate else TELEMETRY_DECIMATION

        telemetry: list[TelemetryFrame] = []
        saturated_streak = 0
        lost_streak = 0
        touched = False
        fault = None
        f_n_floor: float | None = None
        last_f_normal = 0.0
        for i in range(n_steps):
            t = i * DT
            tracking = t >= APPROACH_TIME
            if tracking:
                target = track_path(frames, t - APPROACH_TIME, scn.profile)
                frame = target.frame
                # Keep the impedance target slightly below the surface while
                # the force loop runs; the spring preload prevents contact
                # chatter and the force regulator absorbs the constant bias.
                target = replace(
                    target,
                    pose=RigidTransform._fast(
                        target.pose.rotation,
                        target.pose.translation - PRELOAD_DEPTH * frame.n,
                    ),
                )
            else:
                # Hover above the path start, then lower the target through the
                # surface to PRELOAD_DEPTH so contact is established gently
                # (near-zero relative velocity) before the force loop engages.
                s = min(max((t - SETTLE_TIME) / DESCEND_TIME, 0.0), 1.0)
                offset = (1.0 - s) * APPROACH_LIFT - s * PRELOAD_DEPTH
                pose = RigidTransform(first.tool_rotation, first.p + offset * first.n)
                target = MotionTarget(pose=pose, frame=first)
                frame = first

            pose = forward_kinematics(model, state.q).pose
            jac = jacobian(model, state.q)
            wrench, in_contact = contact_wrench(scn.surface, pose, jac @ state.qd)
            tau_ext = jac.T @ wrench
            if scn.tau_noise_std > 0:
                tau_ext = tau_ext + rng.normal(0.0, scn.tau_noise_std, model.dof)

            if tracking:
                # Ramp the setpoint from the force already held by the
                # approach preload, so the loop engages without a step change.
                if f_n_floor is None:
                    f_n_floor = min(max(last_f_normal, 0.0), scn.gains.f_n)
                ramp = min((t - APPROACH_TIME) / FORCE_RAMP_TIME, 1.0)
                scale = (f_n_floor + ramp * (scn.gains.f_n - f_n_floor)) / scn.gains.f_n
            else:
                scale = 0.0
            controller.gains = scn.gains if tracking else approach_gains
            out = controller.tick(
                model, state, target, frame, tau_ext,
                force_loop_active=tracking, f_n_scale=scale,
            )
            state = step(model, state, out.tau, wrench, DT)
            last_f_normal = out.f_normal

            saturated_streak = saturated_streak + 1 if out.saturated else 0
            if tracking:
                touched = touched or in_contact
                if touched and not in_contact:
                    lost_streak += 1
                else:
                    lost_streak = 0

            if i % decimation == 0:
                telemetry.append(
                    TelemetryFrame(
                        t=t,
                        q=state.q.copy(),
                        position=pose.translation.copy(),
                        e_x=out.e_x.copy(),
                        fn_meas=out.f_normal,
                        fn_des=scn.gains.f_n * scale,
                        contact=in_contact,
                        saturated=out.saturated,
                    )
                )
            if saturated_streak > fault_steps:
                fault = f"torque saturated for more than {FAULT_WINDOW} s"
                break
            if lost_streak > fault_steps:
                fault = f"contact lost for more than {FAULT_WINDOW} s"
                break
        return telemetry, fault
