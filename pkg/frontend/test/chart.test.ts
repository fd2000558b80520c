import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";
import {
  bandPolygonPoints,
  chartFrame,
  polylinePoints,
  renderChart,
} from "../src/chart.js";
import { spanText } from "../src/format.js";
import type { TestResponse } from "../src/types.js";

function fixture(name: string): TestResponse {
  const text = readFileSync(
    new URL(`./fixtures/${name}`, import.meta.url),
    "utf8",
  );
  return JSON.parse(text) as TestResponse;
}

const doc = fixture("test-default.json");

function polygonPoints(svg: string, cls: string): string {
  const match = svg.match(
    new RegExp(`<polygon class="${cls}" points="([^"]+)"`),
  );
  expect(match, `polygon ${cls} present`).not.toBeNull();
  return match![1];
}

describe("renderChart", () => {
  const svg = renderChart(doc);

  it("draws the smooth curve with one vertex per service grid point", () => {
    const match = svg.match(/<polyline class="curve" points="([^"]+)"/);
    expect(match).not.toBeNull();
    expect(match![1].split(" ").length).toBe(doc.curve.grid.length);
  });

  it("draws each band with exactly its grid vertices, never resampled", () => {
    for (const kind of ["pointwise", "scb-sup", "scb-inf"]) {
      const band = doc.bands.find((b) => b.kind === kind)!;
      const cls = { pointwise: "band-pointwise", "scb-sup": "band-sup", "scb-inf": "band-inf" }[kind]!;
      const pts = polygonPoints(svg, cls).split(" ");
      expect(pts.length).toBe(2 * band.grid.length);
    }
  });

  it("band vertices sit at the scaled grid positions", () => {
    const frame = chartFrame(doc);
    const band = doc.bands.find((b) => b.kind === "scb-sup")!;
    const pts = polygonPoints(svg, "band-sup").split(" ");
    const first = pts[0].split(",").map(Number);
    const last = pts[band.grid.length - 1].split(",").map(Number);
    expect(first[0]).toBeCloseTo(frame.sx(band.grid[0]), 2);
    expect(first[1]).toBeCloseTo(frame.sy(band.upper[0]), 2);
    expect(last[0]).toBeCloseTo(frame.sx(band.grid[band.grid.length - 1]), 2);
    // lower edge walks back: the final vertex is the first grid point's lower bound
    const closing = pts[pts.length - 1].split(",").map(Number);
    expect(closing[0]).toBeCloseTo(frame.sx(band.grid[0]), 2);
    expect(closing[1]).toBeCloseTo(frame.sy(band.lower[0]), 2);
  });

  it("annotates every significant span with the service's numbers", () => {
    expect(doc.relevance.spans.length).toBeGreaterThan(0);
    for (const span of doc.relevance.spans) {
      expect(svg).toContain(`significant ${spanText(span)}`);
    }
  });

  it("shades violation spans from the equivalence test", () => {
    expect(doc.equivalence.spans.length).toBeGreaterThan(0);
    for (const span of doc.equivalence.spans) {
      expect(svg).toContain(`violates ${spanText(span)}`);
    }
    expect(svg).toContain(`class="span-violation"`);
  });

  it("labels the x axis with the panel's event times", () => {
    expect(svg).toContain(">event time</text>");
    const frame = chartFrame(doc);
    const t0 = doc.estimate.event_times[0];
    expect(svg).toContain(`x="${frame.sx(t0).toFixed(2)}"`);
  });

  it("renders the reference band region", () => {
    const pts = polygonPoints(svg, "refband").split(" ");
    expect(pts.length).toBe(2 * doc.refband.grid.length);
  });

  it("handles the validated fixture without significant spans", () => {
    const wide = fixture("test-wide.json");
    expect(wide.relevance.spans.length).toBe(0);
    const wideSvg = renderChart(wide);
    expect(wideSvg).not.toContain("span-significant");
    expect(wideSvg).toContain(`class="curve"`);
  });
});

describe("bandPolygonPoints", () => {
  it("clamps unbounded sides to the plot edges", () => {
    const frame = chartFrame(doc, 600, 300);
    const pts = bandPolygonPoints([0, 5], [null, -0.1], [0.2, null], frame)
      .split(" ")
      .map((p) => p.split(",").map(Number));
    expect(pts.length).toBe(4);
    expect(pts[1][1]).toBeCloseTo(frame.top, 2); // null upper hits the top
    expect(pts[3][1]).toBeCloseTo(frame.height - frame.bottom, 2); // null lower
  });
});

describe("polylinePoints", () => {
  it("maps values through the frame one to one", () => {
    const frame = chartFrame(doc, 600, 300);
    const pts = polylinePoints([0, 1, 2], [0.5, 0.6, 0.7], frame).split(" ");
    expect(pts.length).toBe(3);
    expect(Number(pts[0].split(",")[0])).toBeCloseTo(frame.sx(0), 2);
  });
});
