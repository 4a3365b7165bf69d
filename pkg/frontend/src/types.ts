// Wire shapes for the platform HTTP/WS API (see docs/wire.md in the repo root).

export const MECHANISMS = ["lift", "backrest", "left_leg", "right_leg"] as const;
export type MechanismName = (typeof MECHANISMS)[number];

export const METRICS = [
  "conciseness",
  "appropriateness",
  "clarity",
  "empathy",
  "encouragement",
  "explanation",
  "safety",
  "understanding",
] as const;
export type MetricName = (typeof METRICS)[number];

export interface MechanismPose {
  pos: number; // stroke fraction in [0, 1]
  moving: boolean;
}

export interface ActiveStep {
  action: string;
  index: number;
  count: number;
  iteration: number;
  repetitions: number;
}

export interface TelemetryPayload {
  ts: number; // bed clock, seconds
  mechanisms: Record<MechanismName, MechanismPose>;
  active: ActiveStep | null;
}

export interface DecisionPayload {
  kind: "execute" | "clarify" | "refuse";
  response?: string;
  plan?: unknown;
  question?: string;
  reason?: string;
  request_seq: number;
}

export interface StreamFrame {
  kind: "decision" | "telemetry";
  seq: number;
  ts: number;
  payload: DecisionPayload | TelemetryPayload;
}

export type EqualizerWeights = Record<MetricName, number>;

export interface EqualizerState {
  session_id: string;
  weights: EqualizerWeights;
  update_count: number;
}
