/**
 * Request pipeline for one control group: debounced at a fixed delay,
 * with at most one request in flight and latest-wins cancellation.
 *
 * Scheduling a new task while one is pending resets the timer; when the
 * timer fires, any request still in flight is aborted before the new
 * one starts. Callbacks for superseded tasks are never invoked, so a
 * slow stale response can not overwrite a newer result.
 */
export class RequestLane<T> {
  private readonly delayMs: number;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private inflight: AbortController | null = null;
  private seq = 0;

  constructor(delayMs = 150) {
    this.delayMs = delayMs;
  }

  schedule(
    start: (signal: AbortSignal) => Promise<T>,
    onResult: (value: T) => void,
    onError: (err: unknown) => void,
  ): void {
    const token = ++this.seq;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      if (this.inflight !== null) this.inflight.abort();
      const controller = new AbortController();
      this.inflight = controller;
      start(controller.signal).then(
        (value) => {
          if (token !== this.seq) return; // superseded while in flight
          this.inflight = null;
          onResult(value);
        },
        (err) => {
          if (token !== this.seq) return;
          this.inflight = null;
          if (isAbort(err)) return;
          onError(err);
        },
      );
    }, this.delayMs);
  }

  /** Drop the pending timer and abort any in-flight request. */
  cancel(): void {
    this.seq += 1;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    if (this.inflight !== null) {
      this.inflight.abort();
      this.inflight = null;
    }
  }

  get busy(): boolean {
    return this.timer !== null || this.inflight !== null;
  }
}

function isAbort(err: unknown): boolean {
  return err instanceof DOMException && err.name === "AbortError";
}
