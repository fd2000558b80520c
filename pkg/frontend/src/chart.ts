// Hand-rolled SVG event-study chart. Band envelopes are drawn as
// filled polygons whose vertices are exactly the grid points the
// service returned; nothing is resampled or smoothed client-side.

import { fmtNum, spanText } from "./format.js";
import type { BandPayload, Span, TestResponse } from "./types.js";

export interface ChartOptions {
  width?: number;
  height?: number;
}

export interface Frame {
  width: number;
  height: number;
  left: number;
  right: number;
  top: number;
  bottom: number;
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
  sx(t: number): number;
  sy(v: number): number;
}

const MARGIN = { left: 52, right: 14, top: 22, bottom: 36 };

function finiteValues(doc: TestResponse): number[] {
  const ys: number[] = [...doc.curve.beta];
  for (const band of doc.bands) {
    ys.push(...band.lower, ...band.upper);
  }
  for (const v of doc.refband.lower) if (v !== null) ys.push(v);
  for (const v of doc.refband.upper) if (v !== null) ys.push(v);
  return ys.filter((v) => Number.isFinite(v));
}

export function chartFrame(
  doc: TestResponse,
  width = 860,
  height = 430,
): Frame {
  const grid = doc.curve.grid;
  const xMin = grid[0];
  const xMax = grid[grid.length - 1];
  const ys = finiteValues(doc);
  let yMin = Math.min(...ys);
  let yMax = Math.max(...ys);
  if (yMax - yMin < 1e-12) {
    yMin -= 1;
    yMax += 1;
  }
  const pad = 0.08 * (yMax - yMin);
  yMin -= pad;
  yMax += pad;
  const { left, right, top, bottom } = MARGIN;
  const spanX = xMax - xMin || 1;
  const spanY = yMax - yMin;
  return {
    width,
    height,
    left,
    right,
    top,
    bottom,
    xMin,
    xMax,
    yMin,
    yMax,
    sx: (t) => left + ((t - xMin) / spanX) * (width - left - right),
    sy: (v) => top + ((yMax - v) / spanY) * (height - top - bottom),
  };
}

function px(x: number): string {
  return x.toFixed(2);
}

/**
 * Polygon vertices for a band: the upper edge walked forward, then the
 * lower edge walked back. One vertex per grid point and nothing else.
 * A null bound (an unbounded side) is clamped to the plot edge.
 */
export function bandPolygonPoints(
  grid: number[],
  lower: (number | null)[],
  upper: (number | null)[],
  frame: Frame,
): string {
  const plotTop = frame.top;
  const plotBottom = frame.height - frame.bottom;
  const pts: string[] = [];
  for (let i = 0; i < grid.length; i++) {
    const u = upper[i];
    pts.push(`${px(frame.sx(grid[i]))},${px(u === null ? plotTop : frame.sy(u))}`);
  }
  for (let i = grid.length - 1; i >= 0; i--) {
    const l = lower[i];
    pts.push(`${px(frame.sx(grid[i]))},${px(l === null ? plotBottom : frame.sy(l))}`);
  }
  return pts.join(" ");
}

export function polylinePoints(
  grid: number[],
  values: number[],
  frame: Frame,
): string {
  const pts: string[] = [];
  for (let i = 0; i < grid.length; i++) {
    pts.push(`${px(frame.sx(grid[i]))},${px(frame.sy(values[i]))}`);
  }
  return pts.join(" ");
}

function bandByKind(doc: TestResponse, kind: string): BandPayload | undefined {
  return doc.bands.find((b) => b.kind === kind);
}

function spanRects(
  spans: Span[],
  frame: Frame,
  cls: string,
  label: string,
): string {
  const out: string[] = [];
  const top = frame.top;
  const h = frame.height - frame.top - frame.bottom;
  for (const span of spans) {
    const x0 = frame.sx(span[0]);
    const x1 = frame.sx(span[1]);
    const w = Math.max(x1 - x0, 1);
    out.push(
      `<rect class="${cls}" x="${px(x0)}" y="${px(top)}" ` +
        `width="${px(w)}" height="${px(h)}"/>`,
    );
    out.push(
      `<text class="span-label ${cls}-label" x="${px((x0 + x1) / 2)}" ` +
        `y="${px(top + 12)}" text-anchor="middle">` +
        `${label} ${spanText(span)}</text>`,
    );
  }
  return out.join("");
}

function axes(doc: TestResponse, frame: Frame): string {
  const parts: string[] = [];
  const bottomY = frame.height - frame.bottom;
  parts.push(
    `<line class="axis-line" x1="${px(frame.left)}" y1="${px(bottomY)}" ` +
      `x2="${px(frame.width - frame.right)}" y2="${px(bottomY)}"/>`,
  );
  parts.push(
    `<line class="axis-line" x1="${px(frame.left)}" y1="${px(frame.top)}" ` +
      `x2="${px(frame.left)}" y2="${px(bottomY)}"/>`,
  );
  // x ticks at the panel's own event times, thinned if crowded
  const times = doc.estimate.event_times;
  const step = times.length > 16 ? 2 : 1;
  for (let i = 0; i < times.length; i += step) {
    const x = frame.sx(times[i]);
    parts.push(
      `<line class="tick" x1="${px(x)}" y1="${px(bottomY)}" ` +
        `x2="${px(x)}" y2="${px(bottomY + 4)}"/>`,
    );
    parts.push(
      `<text class="tick-label" x="${px(x)}" y="${px(bottomY + 16)}" ` +
        `text-anchor="middle">${fmtNum(times[i])}</text>`,
    );
  }
  // five evenly spaced y ticks over the padded range
  for (let k = 0; k <= 4; k++) {
    const v = frame.yMin + (k / 4) * (frame.yMax - frame.yMin);
    const y = frame.sy(v);
    parts.push(
      `<line class="tick" x1="${px(frame.left - 4)}" y1="${px(y)}" ` +
        `x2="${px(frame.left)}" y2="${px(y)}"/>`,
    );
    parts.push(
      `<text class="tick-label" x="${px(frame.left - 7)}" y="${px(y + 3)}" ` +
        `text-anchor="end">${fmtNum(Number(v.toPrecision(3)))}</text>`,
    );
  }
  parts.push(
    `<text class="axis-title" x="${px((frame.left + frame.width - frame.right) / 2)}" ` +
      `y="${px(frame.height - 6)}" text-anchor="middle">event time</text>`,
  );
  return parts.join("");
}

function legend(frame: Frame): string {
  const entries: [string, string][] = [
    ["curve", "estimate"],
    ["band-pointwise", "pointwise"],
    ["band-sup", "sup band"],
    ["band-inf", "inf band"],
    ["refband", "reference"],
  ];
  const parts: string[] = [];
  let x = frame.left + 8;
  const y = frame.top - 8;
  for (const [cls, label] of entries) {
    parts.push(
      `<rect class="legend-swatch ${cls}" x="${px(x)}" y="${px(y - 8)}" ` +
        `width="14" height="9"/>`,
    );
    parts.push(
      `<text class="legend-label" x="${px(x + 18)}" y="${px(y)}">${label}</text>`,
    );
    x += 18 + 7 * label.length + 22;
  }
  return `<g class="legend">${parts.join("")}</g>`;
}

/** Full SVG document for one /test response. */
export function renderChart(doc: TestResponse, opts: ChartOptions = {}): string {
  const frame = chartFrame(doc, opts.width ?? 860, opts.height ?? 430);
  const parts: string[] = [];

  parts.push(spanRects(doc.equivalence.spans, frame, "span-violation", "violates"));
  parts.push(spanRects(doc.relevance.spans, frame, "span-significant", "significant"));

  parts.push(
    `<polygon class="refband" points="` +
      bandPolygonPoints(doc.refband.grid, doc.refband.lower, doc.refband.upper, frame) +
      `"/>`,
  );
  for (const [kind, cls] of [
    ["pointwise", "band-pointwise"],
    ["scb-sup", "band-sup"],
    ["scb-inf", "band-inf"],
  ] as const) {
    const band = bandByKind(doc, kind);
    if (!band) continue;
    parts.push(
      `<polygon class="${cls}" points="` +
        bandPolygonPoints(band.grid, band.lower, band.upper, frame) +
        `"/>`,
    );
  }

  // zero effect line and the event marker at t = 0
  if (frame.yMin < 0 && frame.yMax > 0) {
    const y0 = frame.sy(0);
    parts.push(
      `<line class="zero-line" x1="${px(frame.left)}" y1="${px(y0)}" ` +
        `x2="${px(frame.width - frame.right)}" y2="${px(y0)}"/>`,
    );
  }
  if (frame.xMin < 0 && frame.xMax > 0) {
    const x0 = frame.sx(0);
    parts.push(
      `<line class="event-line" x1="${px(x0)}" y1="${px(frame.top)}" ` +
        `x2="${px(x0)}" y2="${px(frame.height - frame.bottom)}"/>`,
    );
  }

  parts.push(
    `<polyline class="curve" points="` +
      polylinePoints(doc.curve.grid, doc.curve.beta, frame) +
      `"/>`,
  );
  parts.push(axes(doc, frame));
  parts.push(legend(frame));

  return (
    `<svg viewBox="0 0 ${frame.width} ${frame.height}" role="img" ` +
    `aria-label="honest event study">` +
    parts.join("") +
    `</svg>`
  );
}
