/**
 * Telemetry stream client and frame store.
 *
 * The server streams the full telemetry history as CSV on every request, so
 * after a disconnect the client simply reconnects and replays; the store
 * dedupes frames by their timestamp and keeps them ordered, making replays
 * idempotent.
 */

export interface TelemetryFrame {
  t: number;
  q: number[];
  position: [number, number, number];
  e_x: number[];
  fnMeas: number;
  fnDes: number;
  contact: boolean;
  saturated: boolean;
}

export const TELEMETRY_COLUMNS = 21;

/** Parse one CSV row (no header) into a frame; null for blank lines. */
export function parseTelemetryRow(line: string): TelemetryFrame | null {
  const trimmed = line.trim();
  if (trimmed === "") {
    return null;
  }
  const parts = trimmed.split(",");
  if (parts.length !== TELEMETRY_COLUMNS) {
    throw new Error(`telemetry row has ${parts.length} columns, expected ${TELEMETRY_COLUMNS}`);
  }
  const nums = parts.map(Number);
  if (nums.some((x) => Number.isNaN(x))) {
    throw new Error(`unparseable telemetry row: ${line}`);
  }
  return {
    t: nums[0],
    q: nums.slice(1, 8),
    position: [nums[8], nums[9], nums[10]],
    e_x: nums.slice(11, 17),
    fnMeas: nums[17],
    fnDes: nums[18],
    contact: nums[19] !== 0,
    saturated: nums[20] !== 0,
  };
}

/**
 * Ordered, deduplicated frame store keyed by timestamp.
 *
 * Frames usually arrive in order (appends are O(1)); a replay after
 * reconnect re-sends earlier timestamps, which are dropped.
 */
export class TelemetryStore {
  private byTime = new Map<number, TelemetryFrame>();
  private ordered: TelemetryFrame[] = [];

  /** Returns true if the frame was new. */
  insert(frame: TelemetryFrame): boolean {
    if (this.byTime.has(frame.t)) {
      return false;
    }
    this.byTime.set(frame.t, frame);
    const last = this.ordered[this.ordered.length - 1];
    if (!last || frame.t > last.t) {
      this.ordered.push(frame);
    } else {
      // out-of-order arrival: insert at the right place
      let lo = 0;
      let hi = this.ordered.length;
      while (lo < hi) {
        const mid = (lo + hi) >> 1;
        if (this.ordered[mid].t < frame.t) {
          lo = mid + 1;
        } else {
          hi = mid;
        }
      }
      this.ordered.splice(lo, 0, frame);
    }
    return true;
  }

  get frames(): readonly TelemetryFrame[] {
    return this.ordered;
  }

  get size(): number {
    return this.ordered.length;
  }

  latest(): TelemetryFrame | undefined {
    return this.ordered[this.ordered.length - 1];
  }

  clear(): void {
    this.byTime.clear();
    this.ordered = [];
  }
}

/** Split an incrementally received CSV body into complete lines. */
export class LineBuffer {
  private pending = "";

  push(chunk: string): string[] {
    this.pending += chunk;
    const lines = this.pending.split("\n");
    this.pending = lines.pop() ?? "";
    return lines;
  }

  flush(): string[] {
    const rest = this.pending;
    this.pending = "";
    return rest === "" ? [] : [rest];
  }
}

export type FetchLike = (url: string) => Promise<{
  ok: boolean;
  status: number;
  body: ReadableStream<Uint8Array> | null;
  text(): Promise<string>;
}>;

export interface StreamOptions {
  /** Maximum reconnect attempts after a mid-stream failure. */
  maxRetries?: number;
  onFrame?: (frame: TelemetryFrame, isNew: boolean) => void;
}

/**
 * Consume the telemetry endpoint into `store`, reconnecting on mid-stream
 * errors. Replayed frames are deduplicated by the store.
 */
export async function streamTelemetry(
  url: string,
  store: TelemetryStore,
  fetchFn: FetchLike,
  options: StreamOptions = {},
): Promise<void> {
  const maxRetries = options.maxRetries ?? 3;
  let attempt = 0;
  for (;;) {
    try {
      await consumeOnce(url, store, fetchFn, options.onFrame);
      return;
    } catch (err) {
      attempt += 1;
      if (attempt > maxRetries) {
        throw err;
      }
    }
  }
}

async function consumeOnce(
  url: string,
  store: TelemetryStore,
  fetchFn: FetchLike,
  onFrame?: (frame: TelemetryFrame, isNew: boolean) => void,
): Promise<void> {
  const response = await fetchFn(url);
  if (!response.ok) {
    throw new Error(`telemetry request failed with status ${response.status}`);
  }
  const buffer = new LineBuffer();
  let sawHeader = false;
  const handleLine = (line: string) => {
    if (!sawHeader) {
      sawHeader = true; // first line is the CSV header
      return;
    }
    const frame = parseTelemetryRow(line);
    if (frame) {
      const isNew = store.insert(frame);
      onFrame?.(frame, isNew);
    }
  };
  if (response.body) {
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    for (;;) {
      const { done, value } = await reader.read();
      if (done) {
        break;
      }
      for (const line of buffer.push(decoder.decode(value, { stream: true }))) {
        handleLine(line);
      }
    }
  } else {
    for (const line of buffer.push(await response.text())) {
      handleLine(line);
    }
  }
  for (const line of buffer.flush()) {
    handleLine(line);
  }
}
