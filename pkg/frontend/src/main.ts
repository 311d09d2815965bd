/**
 * Browser entry point: wires the scene canvas, stroke capture, detection
 * overlay, and the telemetry dashboard to the wire API. All decisions live
 * in the imported modules; this file is DOM plumbing only.
 */

import { WorkbenchClient } from "./api.js";
import { StrokeRecorder } from "./stroke.js";
import { streamTelemetry, TelemetryStore } from "./telemetry.js";
import { detectionView, forceTrace, summarize } from "./views.js";

const SCENE_SCALE = 4; // sensor pixels -> display pixels

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

async function start(): Promise<void> {
  const client = new WorkbenchClient("");
  const sessionId = await client.createSession();

  const scene = el<HTMLCanvasElement>("scene");
  const dashboard = el<HTMLCanvasElement>("dashboard");
  const statusLine = el<HTMLDivElement>("status");
  const executeButton = el<HTMLButtonElement>("execute");
  const overlay = el<HTMLDivElement>("detections");

  const background = new Image();
  background.src = client.sceneUrl(sessionId);
  background.onload = () => {
    scene.width = background.width * SCENE_SCALE;
    scene.height = background.height * SCENE_SCALE;
    redrawScene();
  };

  const recorder = new StrokeRecorder();
  let lastStroke: Array<{ u: number; v: number }> = [];
  let pathId: string | null = null;

  function redrawScene(): void {
    const ctx = scene.getContext("2d");
    if (!ctx) return;
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(background, 0, 0, scene.width, scene.height);
    if (lastStroke.length > 1) {
      ctx.strokeStyle = "#3df";
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.moveTo(lastStroke[0].u * SCENE_SCALE, lastStroke[0].v * SCENE_SCALE);
      for (const p of lastStroke.slice(1)) {
        ctx.lineTo(p.u * SCENE_SCALE, p.v * SCENE_SCALE);
      }
      ctx.stroke();
    }
  }

  function toSensor(event: PointerEvent): { u: number; v: number } {
    const rect = scene.getBoundingClientRect();
    return {
      u: (event.clientX - rect.left) / SCENE_SCALE,
      v: (event.clientY - rect.top) / SCENE_SCALE,
    };
  }

  scene.addEventListener("pointerdown", (e) => {
    const p = toSensor(e);
    recorder.begin(p.u, p.v);
  });
  scene.addEventListener("pointermove", (e) => {
    const p = toSensor(e);
    recorder.extend(p.u, p.v);
  });
  scene.addEventListener("pointerup", () => {
    void (async () => {
      lastStroke = recorder.finish();
      redrawScene();
      if (lastStroke.length < 2) return;
      try {
        const ack = await client.definePath(sessionId, lastStroke);
        pathId = ack.path_id;
        statusLine.textContent = `path ${pathId}: ${ack.pixels.length} points stored`;
      } catch (err) {
        statusLine.textContent = String(err);
      }
    })();
  });

  async function refreshDetections(): Promise<void> {
    overlay.replaceChildren();
    for (const det of await client.detections(sessionId)) {
      const view = detectionView(det);
      const boxEl = document.createElement("div");
      boxEl.className = view.cssClass;
      const [u0, v0, u1, v1] = view.box;
      boxEl.style.left = `${u0 * SCENE_SCALE}px`;
      boxEl.style.top = `${v0 * SCENE_SCALE}px`;
      boxEl.style.width = `${(u1 - u0) * SCENE_SCALE}px`;
      boxEl.style.height = `${(v1 - v0) * SCENE_SCALE}px`;
      const caption = document.createElement("span");
      caption.textContent = view.caption;
      boxEl.appendChild(caption);
      if (view.offerTeach) {
        const teach = document.createElement("button");
        teach.textContent = "Teach";
        teach.addEventListener("click", () => {
          const name = window.prompt("Name for this object:");
          if (name) {
            statusLine.textContent = `collect samples for '${name}' and re-detect`;
          }
        });
        boxEl.appendChild(teach);
      }
      overlay.appendChild(boxEl);
    }
  }

  const store = new TelemetryStore();

  function drawDashboard(): void {
    const ctx = dashboard.getContext("2d");
    if (!ctx) return;
    ctx.clearRect(0, 0, dashboard.width, dashboard.height);
    const trace = forceTrace(store.frames, dashboard.width);
    if (trace.length < 2) return;
    const tMax = trace[trace.length - 1][0];
    const fMax = Math.max(12, ...trace.map(([, f]) => f));
    ctx.strokeStyle = "#fa3";
    ctx.beginPath();
    trace.forEach(([t, f], i) => {
      const x = (t / tMax) * dashboard.width;
      const y = dashboard.height - (f / fMax) * dashboard.height;
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
    const s = summarize(store.frames);
    ctx.fillStyle = "#ccc";
    ctx.fillText(
      `frames ${s.frameCount}  t=${s.lastT?.toFixed(2) ?? "-"}  ` +
        `f=${s.fnMeas?.toFixed(2) ?? "-"}N  contact ${(s.contactFraction * 100).toFixed(0)}%`,
      6,
      12,
    );
  }

  executeButton.addEventListener("click", () => {
    void (async () => {
      if (!pathId) {
        statusLine.textContent = "draw a stroke first";
        return;
      }
      try {
        const result = await client.execute(sessionId, pathId);
        statusLine.textContent = `execution ${result.phase}: ${result.frames} frames`;
        store.clear();
        await streamTelemetry(client.telemetryUrl(sessionId), store, fetch.bind(globalThis), {
          onFrame: () => drawDashboard(),
        });
        drawDashboard();
      } catch (err) {
        statusLine.textContent = String(err);
      }
    })();
  });

  await refreshDetections();
  statusLine.textContent = `session ${sessionId} ready`;
}

void start();
