// Display formatting for numbers that arrive from the service. The
// values themselves are never recomputed client-side.

import type { EquivalenceOutcome, RelevanceOutcome, Span } from "./types.js";

/** Compact decimal rendering: up to 6 significant digits, no noise. */
export function fmtNum(x: number): string {
  if (!Number.isFinite(x)) return String(x);
  if (Number.isInteger(x) && Math.abs(x) < 1e15) return String(x);
  const s = x.toPrecision(6);
  return s.includes(".") ? s.replace(/\.?0+$/, "") : s;
}

export function spanText(span: Span): string {
  return `[${fmtNum(span[0])}, ${fmtNum(span[1])}]`;
}

export function spanListText(spans: Span[]): string {
  return spans.map(spanText).join("; ");
}

export interface Badge {
  label: string;
  ok: boolean;
  detail: string;
}

export function relevanceBadge(r: RelevanceOutcome): Badge {
  if (!r.rejected) {
    return {
      label: "not significant",
      ok: false,
      detail: "sup-band never clears the reference band",
    };
  }
  return {
    label: "significant",
    ok: true,
    detail: `honestly significant on ${spanListText(r.spans)}`,
  };
}

export function validationBadge(e: EquivalenceOutcome): Badge {
  if (e.validated) {
    return {
      label: "validated",
      ok: true,
      detail: "inf-band inside the reference band at every pre-event point",
    };
  }
  return {
    label: "not validated",
    ok: false,
    detail: `escapes the reference band on ${spanListText(e.spans)}`,
  };
}
