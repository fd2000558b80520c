import { describe, expect, it } from "vitest";
import { fmtNum, relevanceBadge, spanListText, spanText, validationBadge } from "../src/format.js";

describe("fmtNum", () => {
  it("keeps integers whole", () => {
    expect(fmtNum(10)).toBe("10");
    expect(fmtNum(-4)).toBe("-4");
    expect(fmtNum(0)).toBe("0");
  });

  it("trims trailing zeros from decimals", () => {
    expect(fmtNum(0.5)).toBe("0.5");
    expect(fmtNum(2.3)).toBe("2.3");
    expect(fmtNum(1.0000001)).toBe("1");
  });

  it("caps at six significant digits", () => {
    expect(fmtNum(0.123456789)).toBe("0.123457");
    expect(fmtNum(1 / 3)).toBe("0.333333");
  });
});

describe("span text", () => {
  it("renders one span as an interval", () => {
    expect(spanText([1, 10])).toBe("[1, 10]");
    expect(spanText([-3.5, -0.25])).toBe("[-3.5, -0.25]");
  });

  it("joins several spans", () => {
    expect(spanListText([[1, 2], [4, 5]])).toBe("[1, 2]; [4, 5]");
  });
});

describe("badges", () => {
  it("significant result carries its spans", () => {
    const badge = relevanceBadge({ rejected: true, spans: [[1, 10]], n_points: 100 });
    expect(badge.label).toBe("significant");
    expect(badge.ok).toBe(true);
    expect(badge.detail).toContain("[1, 10]");
  });

  it("non-rejection has no spans to report", () => {
    const badge = relevanceBadge({ rejected: false, spans: [], n_points: 100 });
    expect(badge.label).toBe("not significant");
    expect(badge.ok).toBe(false);
  });

  it("validation failure lists the violating runs", () => {
    const badge = validationBadge({
      validated: false,
      spans: [[-10, -6.5]],
      n_points: 101,
    });
    expect(badge.label).toBe("not validated");
    expect(badge.detail).toContain("[-10, -6.5]");
  });

  it("validated badge is green", () => {
    const badge = validationBadge({ validated: true, spans: [], n_points: 101 });
    expect(badge.label).toBe("validated");
    expect(badge.ok).toBe(true);
  });
});
