/**
 * Pure view-model helpers: everything the DOM layer renders is computed
 * here so it can be unit-tested without a browser.
 */

import type { Detection } from "./api.js";
import type { TelemetryFrame } from "./telemetry.js";

export const UNKNOWN_LABEL = "Unknown";

export interface DetectionView {
  label: string;
  box: [number, number, number, number];
  cssClass: string;
  /** Unknown objects get a teach affordance instead of a class label. */
  offerTeach: boolean;
  caption: string;
}

export function detectionView(det: Detection): DetectionView {
  const unknown = det.label === UNKNOWN_LABEL;
  const ratio = det.ratio === null ? "" : ` (${det.ratio.toFixed(2)})`;
  return {
    label: det.label,
    box: det.box,
    cssClass: unknown ? "detection detection-unknown" : "detection detection-known",
    offerTeach: unknown,
    caption: unknown ? "Unknown — teach?" : `${det.label}${ratio}`,
  };
}

export interface DashboardSummary {
  frameCount: number;
  lastT: number | null;
  fnMeas: number | null;
  fnDes: number | null;
  inContact: boolean;
  contactFraction: number;
  saturatedCount: number;
}

export function summarize(frames: readonly TelemetryFrame[]): DashboardSummary {
  const last = frames[frames.length - 1];
  let contact = 0;
  let saturated = 0;
  for (const f of frames) {
    if (f.contact) contact += 1;
    if (f.saturated) saturated += 1;
  }
  return {
    frameCount: frames.length,
    lastT: last ? last.t : null,
    fnMeas: last ? last.fnMeas : null,
    fnDes: last ? last.fnDes : null,
    inContact: last ? last.contact : false,
    contactFraction: frames.length ? contact / frames.length : 0,
    saturatedCount: saturated,
  };
}

/**
 * Downsample a force trace to at most `width` (t, value) pairs for a
 * fixed-width plot, preserving order.
 */
export function forceTrace(
  frames: readonly TelemetryFrame[],
  width: number,
): Array<[number, number]> {
  if (frames.length <= width) {
    return frames.map((f) => [f.t, f.fnMeas]);
  }
  const out: Array<[number, number]> = [];
  for (let i = 0; i < width; i++) {
    const f = frames[Math.floor((i * frames.length) / width)];
    out.push([f.t, f.fnMeas]);
  }
  return out;
}
