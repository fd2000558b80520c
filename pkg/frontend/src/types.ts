// Shapes of the service's JSON responses. Field names mirror the wire
// format exactly; see docs/http-api.md in the repository root.

export interface UploadResponse {
  id: string;
  n_units: number;
  n_periods: number;
  event_times: number[];
  design: "treatment" | "staggered";
}

export interface BandPayload {
  kind: string;
  alpha: number;
  method: string;
  crit: number;
  grid: number[];
  lower: number[];
  upper: number[];
}

// Reference-band bounds can be null where a side is unbounded: the
// serializer maps infinities to JSON null.
export interface RefbandPayload {
  kind: string;
  params: Record<string, number>;
  members?: RefbandPayload[];
  grid: number[];
  lower: (number | null)[];
  upper: (number | null)[];
}

export type Span = [number, number];

export interface TestOutcome {
  spans: Span[];
  n_points: number;
}

export interface RelevanceOutcome extends TestOutcome {
  rejected: boolean;
}

export interface EquivalenceOutcome extends TestOutcome {
  validated: boolean;
}

export interface TestResponse {
  n_units: number;
  n_periods: number;
  config: {
    alpha: number;
    method: string;
    B: number;
    seed: number;
    t_a: number;
    grid_post: number;
    grid_pre: number;
    refband: object | null;
  };
  estimate: {
    estimator: string;
    n_units: number;
    event_times: number[];
    beta: number[];
  };
  curve: { grid: number[]; beta: number[] };
  bands: BandPayload[];
  refband: RefbandPayload;
  relevance: RelevanceOutcome;
  equivalence: EquivalenceOutcome;
}

export type RefbandKind = "anticipation" | "trend" | "constant" | "union";

export type Method = "param-boot" | "mult-boot" | "kac-rice";

/**
 * Everything the control panel can set. sLower / sUpper double as the
 * anticipation scale factors and, for the constant kind, the band's raw
 * lower / upper endpoints; null means "leave it to the service default".
 */
export interface ControlValues {
  kind: RefbandKind;
  tA: number;
  sLower: number | null;
  sUpper: number | null;
  mLower: number;
  mUpper: number;
  alpha: number;
  method: Method;
}
