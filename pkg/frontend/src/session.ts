// Client-side session: the uploaded dataset, the controls, the result
// currently on screen, and an append-only history of every parameter
// set that was actually sent to the service.

import { Api, ApiError } from "./api.js";
import { ControlError, DEFAULT_CONTROLS, testBody } from "./controls.js";
import { RequestLane } from "./schedule.js";
import type { ControlValues, TestResponse, UploadResponse } from "./types.js";

export type Outcome =
  | { kind: "result"; rejected: boolean; validated: boolean }
  | { kind: "error"; message: string };

export interface HistoryEntry {
  readonly datasetId: string;
  readonly params: ControlValues;
  readonly outcome: Outcome;
}

export type SessionEvent = "dataset" | "pending" | "result" | "error";

export type Listener = (event: SessionEvent) => void;

/**
 * The displayed result always corresponds to the displayed parameters:
 * every control change goes through the lane (debounce + latest-wins),
 * and `current` is only set from the response to the newest request.
 */
export class Session {
  readonly api: Api;
  dataset: UploadResponse | null = null;
  params: ControlValues = { ...DEFAULT_CONTROLS };
  current: { params: ControlValues; response: TestResponse } | null = null;
  lastError: string | null = null;
  private readonly entries: HistoryEntry[] = [];
  private readonly lane: RequestLane<TestResponse>;
  private listener: Listener | null = null;

  constructor(api: Api, lane?: RequestLane<TestResponse>) {
    this.api = api;
    this.lane = lane ?? new RequestLane<TestResponse>(150);
  }

  get history(): readonly HistoryEntry[] {
    return this.entries;
  }

  onChange(listener: Listener): void {
    this.listener = listener;
  }

  private emit(event: SessionEvent): void {
    if (this.listener) this.listener(event);
  }

  async uploadFile(file: Blob, name?: string): Promise<UploadResponse> {
    this.lane.cancel();
    const dataset = await this.api.upload(file, name);
    this.dataset = dataset;
    this.current = null;
    this.lastError = null;
    this.emit("dataset");
    this.scheduleTest();
    return dataset;
  }

  async uploadDemo(): Promise<UploadResponse> {
    const blob = await this.api.demoCsv();
    return this.uploadFile(blob, "demo.csv");
  }

  /** Apply a control change and schedule a re-test. */
  setParams(patch: Partial<ControlValues>): void {
    this.params = { ...this.params, ...patch };
    this.scheduleTest();
  }

  /** Re-issue the parameters of a past history entry unchanged. */
  replay(index: number): void {
    const entry = this.entries[index];
    if (!entry) return;
    this.params = { ...entry.params };
    this.scheduleTest();
  }

  private scheduleTest(): void {
    const dataset = this.dataset;
    if (!dataset) return;
    let body: object;
    try {
      body = testBody(this.params);
    } catch (err) {
      if (err instanceof ControlError) {
        // nothing was sent, so nothing enters the history
        this.current = null;
        this.lastError = err.message;
        this.emit("error");
        return;
      }
      throw err;
    }
    const params = { ...this.params };
    this.lastError = null;
    this.emit("pending");
    this.lane.schedule(
      (signal) => this.api.runTest(dataset.id, body, signal),
      (response) => {
        this.current = { params, response };
        this.entries.push({
          datasetId: dataset.id,
          params,
          outcome: {
            kind: "result",
            rejected: response.relevance.rejected,
            validated: response.equivalence.validated,
          },
        });
        this.emit("result");
      },
      (err) => {
        this.current = null;
        this.lastError = err instanceof ApiError ? err.message : String(err);
        this.entries.push({
          datasetId: dataset.id,
          params,
          outcome: { kind: "error", message: this.lastError },
        });
        this.emit("error");
      },
    );
  }
}
