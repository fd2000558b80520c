// Maps control-panel values to the /test request body. Pure functions
// so the mapping is testable without a DOM.

import type { ControlValues, RefbandKind } from "./types.js";

export const DEFAULT_CONTROLS: ControlValues = {
  kind: "anticipation",
  tA: -1,
  sLower: null,
  sUpper: null,
  mLower: 1,
  mUpper: 1,
  alpha: 0.05,
  method: "param-boot",
};

/** Raised when the controls can not form a valid request. */
export class ControlError extends Error {}

function anticipationSpec(c: ControlValues): object {
  const spec: Record<string, unknown> = { kind: "anticipation", t_a: c.tA };
  if (c.sLower !== null) spec.s_lower = c.sLower;
  if (c.sUpper !== null) spec.s_upper = c.sUpper;
  return spec;
}

function trendSpec(c: ControlValues): object {
  return { kind: "trend", m_lower: c.mLower, m_upper: c.mUpper };
}

export function refbandSpec(c: ControlValues): object {
  switch (c.kind) {
    case "anticipation":
      return anticipationSpec(c);
    case "trend":
      return trendSpec(c);
    case "constant":
      // the two scale inputs become the band's raw endpoints
      if (c.sLower === null || c.sUpper === null) {
        throw new ControlError("constant band needs both endpoints");
      }
      return { kind: "constant", lower: c.sLower, upper: c.sUpper };
    case "union":
      return { kind: "union", members: [anticipationSpec(c), trendSpec(c)] };
    default: {
      const kind: never = c.kind;
      throw new ControlError(`unknown band kind ${kind}`);
    }
  }
}

/**
 * Body for POST /datasets/{id}/test. B and seed stay at service
 * defaults so identical controls always give identical responses.
 */
export function testBody(c: ControlValues): object {
  return {
    alpha: c.alpha,
    method: c.method,
    t_a: c.tA,
    refband: refbandSpec(c),
  };
}

export const KIND_LABELS: Record<RefbandKind, string> = {
  anticipation: "anticipation",
  trend: "trend",
  constant: "constant",
  union: "anticipation + trend",
};

/** Labels for the two scale inputs, which change meaning by kind. */
export function scaleLabels(kind: RefbandKind): [string, string] {
  if (kind === "constant") return ["lower bound", "upper bound"];
  return ["S lower", "S upper"];
}
