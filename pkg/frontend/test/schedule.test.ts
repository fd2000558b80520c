import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { RequestLane } from "../src/schedule.js";

interface Probe {
  starts: AbortSignal[];
  results: string[];
  errors: unknown[];
}

function probe(): Probe {
  return { starts: [], results: [], errors: [] };
}

describe("RequestLane", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  it("a burst of schedules issues exactly one request after the delay", async () => {
    const lane = new RequestLane<string>(150);
    const p = probe();
    const start = (signal: AbortSignal) => {
      p.starts.push(signal);
      return Promise.resolve("ok");
    };
    for (let i = 0; i < 5; i++) {
      if (i > 0) await vi.advanceTimersByTimeAsync(50); // under the window
      lane.schedule(start, (v) => p.results.push(v), (e) => p.errors.push(e));
    }
    expect(p.starts.length).toBe(0);
    await vi.advanceTimersByTimeAsync(149);
    expect(p.starts.length).toBe(0);
    await vi.advanceTimersByTimeAsync(1);
    expect(p.starts.length).toBe(1);
    expect(p.results).toEqual(["ok"]);
    expect(p.errors).toEqual([]);
  });

  it("aborts the in-flight request when a newer one fires", async () => {
    const lane = new RequestLane<string>(150);
    const p = probe();
    let hangReject: ((err: unknown) => void) | null = null;
    const hanging = (signal: AbortSignal) => {
      p.starts.push(signal);
      return new Promise<string>((_resolve, reject) => {
        hangReject = reject;
        signal.addEventListener("abort", () =>
          reject(new DOMException("aborted", "AbortError")),
        );
      });
    };
    lane.schedule(hanging, (v) => p.results.push(v), (e) => p.errors.push(e));
    await vi.advanceTimersByTimeAsync(150);
    expect(p.starts.length).toBe(1);
    expect(p.starts[0].aborted).toBe(false);

    lane.schedule(
      (signal) => {
        p.starts.push(signal);
        return Promise.resolve("second");
      },
      (v) => p.results.push(v),
      (e) => p.errors.push(e),
    );
    await vi.advanceTimersByTimeAsync(150);
    expect(p.starts.length).toBe(2);
    expect(p.starts[0].aborted).toBe(true); // latest wins
    expect(p.results).toEqual(["second"]);
    expect(p.errors).toEqual([]); // the abort is swallowed, not reported
    expect(hangReject).not.toBeNull();
  });

  it("drops a stale response that resolves after a newer schedule", async () => {
    const lane = new RequestLane<string>(150);
    const p = probe();
    let resolveFirst: ((v: string) => void) | null = null;
    lane.schedule(
      (signal) => {
        p.starts.push(signal);
        return new Promise<string>((resolve) => {
          resolveFirst = resolve;
        });
      },
      (v) => p.results.push(v),
      (e) => p.errors.push(e),
    );
    await vi.advanceTimersByTimeAsync(150);
    expect(p.starts.length).toBe(1);

    // newer schedule is pending (timer armed) when the old response lands
    lane.schedule(
      (signal) => {
        p.starts.push(signal);
        return Promise.resolve("new");
      },
      (v) => p.results.push(v),
      (e) => p.errors.push(e),
    );
    resolveFirst!("old");
    await vi.advanceTimersByTimeAsync(150);
    expect(p.results).toEqual(["new"]);
  });

  it("cancel drops the timer and aborts the in-flight request", async () => {
    const lane = new RequestLane<string>(150);
    const p = probe();
    lane.schedule(
      (signal) => {
        p.starts.push(signal);
        return new Promise<string>((_resolve, reject) => {
          signal.addEventListener("abort", () =>
            reject(new DOMException("aborted", "AbortError")),
          );
        });
      },
      (v) => p.results.push(v),
      (e) => p.errors.push(e),
    );
    await vi.advanceTimersByTimeAsync(150);
    expect(lane.busy).toBe(true);
    lane.cancel();
    expect(p.starts[0].aborted).toBe(true);
    expect(lane.busy).toBe(false);

    lane.schedule(
      () => Promise.resolve("ignored"),
      (v) => p.results.push(v),
      (e) => p.errors.push(e),
    );
    lane.cancel();
    await vi.advanceTimersByTimeAsync(1000);
    expect(p.results).toEqual([]);
    expect(p.errors).toEqual([]);
  });

  it("reports real errors for the newest request only", async () => {
    const lane = new RequestLane<string>(150);
    const p = probe();
    lane.schedule(
      () => Promise.reject(new Error("boom")),
      (v) => p.results.push(v),
      (e) => p.errors.push(e),
    );
    await vi.advanceTimersByTimeAsync(150);
    expect(p.errors.length).toBe(1);
    expect((p.errors[0] as Error).message).toBe("boom");
  });
});
