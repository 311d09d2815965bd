"""HTTP wire API for the workbench: sessions, scene, teaching, paths,
execution, and a streaming telemetry channel. The browser UI is a pure
client of these endpoints and holds no authoritative state."""

from __future__ import annotations

import io
import itertools
import threading

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import Response, StreamingResponse
from PIL import Image
from pydantic import BaseModel

from ..errors import WorkbenchError
from ..geometry.cloud import Stroke2D
from .scenario import Scenario
from .session import Session
from .telemetry import TELEMETRY_HEADER


class TeachRequest(BaseModel):
    name: str
    patches: list[list[list[int]]]


class StrokeRequest(BaseModel):
    pixels: list[list[float]]


class AreaRequest(BaseModel):
    polygon: list[list[float]]
    spacing: float = 4.0


class PairRequest(BaseModel):
    path_id: str
    object: str | None = None


class ExecuteRequest(BaseModel):
    path_id: str
    full_rate: bool = False


def _depth_to_png(depth: np.ndarray) -> bytes:
    """Grayscale render of the depth image (near = bright)."""
    finite = depth[depth > 0]
    lo, hi = float(finite.min()), float(finite.max())
    span = hi - lo if hi > lo else 1.0
    gray = np.where(depth > 0, 255 - ((depth - lo) / span * 255.0), 0).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(gray, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def create_app(scenario: Scenario) -> FastAPI:
    app = FastAPI(title="workbench")
    sessions: dict[str, Session] = {}
    ids = itertools.count(1)
    lock = threading.Lock()

    def get_session(sid: str) -> Session:
        session = sessions.get(sid)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session '{sid}'")
        return session

    @app.exception_handler(WorkbenchError)
    async def workbench_error(request, exc):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.post("/sessions")
    def create_session():
        with lock:
            sid = f"s{next(ids)}"
            sessions[sid] = Session(id=sid, scenario=scenario)
        return {"id": sid}

    @app.get("/sessions/{sid}")
    def session_status(sid: str):
        session = get_session(sid)
        return {
            "id": session.id,
            "phase": session.phase.value,
            "paths": sorted(session.paths),
            "pairings": dict(session.pairings),
            "classes": sorted(session.registry.names),
            "fault_reason": session.fault_reason,
            "telemetry_frames": len(session.telemetry),
        }

    @app.get("/sessions/{sid}/scene")
    def scene_frame(sid: str):
        session = get_session(sid)
        return Response(content=_depth_to_png(session.scenario.depth), media_type="image/png")

    @app.get("/sessions/{sid}/detections")
    def detections(sid: str):
        session = get_session(sid)
        out = []
        for det in session.detect_objects():
            out.append(
                {
                    "box": list(det.box),
                    "label": det.result.label,
                    "ratio": det.result.ratio,
                    "d1": det.result.d1,
                    "d2": det.result.d2,
                }
            )
        return out

    @app.post("/sessions/{sid}/teach")
    def teach(sid: str, body: TeachRequest):
        session = get_session(sid)
        patches = [np.asarray(p, dtype=np.uint8) for p in body.patches]
        record = session.teach_object(body.name, patches)
        return {"name": record.name, "sample_count": record.sample_count}

    @app.post("/sessions/{sid}/paths")
    def define_path(sid: str, body: StrokeRequest):
        session = get_session(sid)
        pixels = np.asarray(body.pixels, dtype=float)
        path_id = session.define_path(Stroke2D(pixels))
        # echo the submitted pixels so the client can verify the round trip
        return {"path_id": path_id, "pixels": session.paths[path_id].pixels.tolist()}

    @app.post("/sessions/{sid}/areas")
    def define_area(sid: str, body: AreaRequest):
        session = get_session(sid)
        polygon = np.asarray(body.polygon, dtype=float)
        path_id = session.define_area(Stroke2D(polygon), spacing=body.spacing)
        return {"path_id": path_id, "pixels": session.paths[path_id].pixels.tolist()}

    @app.delete("/sessions/{sid}/paths/{pid}")
    def delete_path(sid: str, pid: str):
        get_session(sid).delete_path(pid)
        return {"deleted": pid}

    @app.post("/sessions/{sid}/pair")
    def pair(sid: str, body: PairRequest):
        session = get_session(sid)
        session.pair_path(body.path_id, body.object)
        return {"pairings": dict(session.pairings)}

    @app.get("/sessions/{sid}/reachability/{pid}")
    def reachability(sid: str, pid: str):
        result = get_session(sid).check_reachability(pid)
        return {"reachable": result.reachable, "first_unreachable": result.first_unreachable}

    @app.post("/sessions/{sid}/execute")
    def execute(sid: str, body: ExecuteRequest):
        session = get_session(sid)
        frames = session.execute(body.path_id, full_rate=body.full_rate)
        return {
            "phase": session.phase.value,
            "frames": len(frames),
            "fault_reason": session.fault_reason,
        }

    @app.get("/sessions/{sid}/telemetry")
    def telemetry(sid: str):
        session = get_session(sid)

        def stream():
            yield TELEMETRY_HEADER + "\n"
            for frame in list(session.telemetry):
                yield frame.to_csv_row() + "\n"

        return StreamingResponse(stream(), media_type="text/plain")

    return app
