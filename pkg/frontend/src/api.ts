/**
 * Typed client for the workbench wire API. The browser holds no
 * authoritative state: every mutation goes through these endpoints and the
 * server's response is the truth.
 */

import type { Point } from "./stroke.js";

export interface Detection {
  box: [number, number, number, number];
  label: string;
  ratio: number | null;
  d1: number | null;
  d2: number | null;
}

export interface SessionStatus {
  id: string;
  phase: string;
  paths: string[];
  pairings: Record<string, string>;
  classes: string[];
  fault_reason: string | null;
  telemetry_frames: number;
}

export interface PathAck {
  path_id: string;
  pixels: [number, number][];
}

export interface ExecuteResult {
  phase: string;
  frames: number;
  fault_reason: string | null;
}

export interface ReachabilityResult {
  reachable: boolean;
  first_unreachable: number | null;
}

export class EchoMismatchError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "EchoMismatchError";
  }
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export function pixelsEqual(sent: [number, number][], echoed: [number, number][]): boolean {
  if (sent.length !== echoed.length) {
    return false;
  }
  return sent.every(([u, v], i) => echoed[i][0] === u && echoed[i][1] === v);
}

type JsonFetch = typeof fetch;

export class WorkbenchClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: JsonFetch = globalThis.fetch.bind(globalThis),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    if (!response.ok) {
      let detail = `${response.status}`;
      try {
        const body = (await response.json()) as { detail?: string };
        detail = body.detail ?? detail;
      } catch {
        // non-JSON error body: keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  async createSession(): Promise<string> {
    const body = await this.request<{ id: string }>("/sessions", { method: "POST" });
    return body.id;
  }

  status(sessionId: string): Promise<SessionStatus> {
    return this.request(`/sessions/${sessionId}`);
  }

  sceneUrl(sessionId: string): string {
    return `${this.baseUrl}/sessions/${sessionId}/scene`;
  }

  detections(sessionId: string): Promise<Detection[]> {
    return this.request(`/sessions/${sessionId}/detections`);
  }

  async teach(sessionId: string, name: string, patches: number[][][]): Promise<number> {
    const body = await this.request<{ name: string; sample_count: number }>(
      `/sessions/${sessionId}/teach`,
      { method: "POST", body: JSON.stringify({ name, patches }) },
    );
    return body.sample_count;
  }

  /**
   * Submit a stroke; the server acknowledges by echoing the pixels it
   * stored. A mismatch means the path the arm will follow is not the one
   * drawn, so it is rejected loudly.
   */
  async definePath(sessionId: string, stroke: Point[]): Promise<PathAck> {
    const pixels: [number, number][] = stroke.map((p) => [p.u, p.v]);
    const ack = await this.request<PathAck>(`/sessions/${sessionId}/paths`, {
      method: "POST",
      body: JSON.stringify({ pixels }),
    });
    if (!pixelsEqual(pixels, ack.pixels)) {
      throw new EchoMismatchError(`server stored a different polyline for ${ack.path_id}`);
    }
    return ack;
  }

  async defineArea(sessionId: string, polygon: Point[], spacing = 4.0): Promise<PathAck> {
    return this.request<PathAck>(`/sessions/${sessionId}/areas`, {
      method: "POST",
      body: JSON.stringify({ polygon: polygon.map((p) => [p.u, p.v]), spacing }),
    });
  }

  deletePath(sessionId: string, pathId: string): Promise<{ deleted: string }> {
    return this.request(`/sessions/${sessionId}/paths/${pathId}`, { method: "DELETE" });
  }

  pair(sessionId: string, pathId: string, object: string | null): Promise<void> {
    return this.request(`/sessions/${sessionId}/pair`, {
      method: "POST",
      body: JSON.stringify({ path_id: pathId, object }),
    });
  }

  reachability(sessionId: string, pathId: string): Promise<ReachabilityResult> {
    return this.request(`/sessions/${sessionId}/reachability/${pathId}`);
  }

  execute(sessionId: string, pathId: string): Promise<ExecuteResult> {
    return this.request(`/sessions/${sessionId}/execute`, {
      method: "POST",
      body: JSON.stringify({ path_id: pathId }),
    });
  }

  telemetryUrl(sessionId: string): string {
    return `${this.baseUrl}/sessions/${sessionId}/telemetry`;
  }
}
