// Console view-model: transcript, live pose, equalizer display, and the
// three user actions. Holds every behavior the UI needs while staying
// DOM-free; the view layer just renders ConsoleState after each change.
//
// Contracts carried here:
// - transcript ordering matches the server log: a decision is inserted
//   right after the request (by request_seq) it answers, not merely
//   appended, so concurrent requests cannot interleave wrongly;
// - no user action is silent: every POST produces an entry that ends up
//   confirmed or error;
// - interrupt stays available while a request is in flight.

import { ApiError, PlatformClient } from "./api.js";
import type { ConnectionState } from "./stream.js";
import type {
  ActiveStep,
  DecisionPayload,
  EqualizerWeights,
  MechanismName,
  MechanismPose,
  MetricName,
  StreamFrame,
  TelemetryPayload,
} from "./types.js";
import { MECHANISMS as MECHANISM_NAMES } from "./types.js";

export type EntryState = "pending" | "confirmed" | "error";

export interface TranscriptEntry {
  id: number;
  role: "patient" | "agent" | "system";
  kind: "request" | "response" | "question" | "refusal" | "notice";
  text: string;
  state: EntryState;
  error?: string;
  seq?: number; // server seq for requests; request_seq for agent entries
}

export interface ConsoleState {
  sessionId: string | null;
  connection: ConnectionState;
  transcript: TranscriptEntry[];
  pose: Record<MechanismName, MechanismPose>;
  active: ActiveStep | null;
  bedClock: number | null;
  weights: EqualizerWeights | null;
  updateCount: number;
  requestInFlight: boolean;
  feedbackInFlight: boolean;
}

const IDLE_POSE: Record<MechanismName, MechanismPose> = {
  lift: { pos: 0, moving: false },
  backrest: { pos: 0, moving: false },
  left_leg: { pos: 0, moving: false },
  right_leg: { pos: 0, moving: false },
};

export interface CoreOptions {
  feedbackPollMs?: number;
  feedbackPollLimit?: number;
}

export class ConsoleCore {
  readonly state: ConsoleState = {
    sessionId: null,
    connection: "connecting",
    transcript: [],
    pose: { ...IDLE_POSE },
    active: null,
    bedClock: null,
    weights: null,
    updateCount: 0,
    requestInFlight: false,
    feedbackInFlight: false,
  };

  private listeners = new Set<(state: ConsoleState) => void>();
  private nextEntryId = 1;
  private readonly pollMs: number;
  private readonly pollLimit: number;

  constructor(
    private readonly client: PlatformClient,
    options: CoreOptions = {},
  ) {
    this.pollMs = options.feedbackPollMs ?? 150;
    this.pollLimit = options.feedbackPollLimit ?? 20;
  }

  subscribe(listener: (state: ConsoleState) => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  // --- session and stream ------------------------------------------------------

  async openSession(): Promise<string> {
    const sessionId = await this.client.createSession();
    this.state.sessionId = sessionId;
    await this.refreshEqualizer();
    this.emit();
    return sessionId;
  }

  setConnection(connection: ConnectionState): void {
    this.state.connection = connection;
    this.emit();
  }

  handleFrame(frame: StreamFrame): void {
    if (frame.kind === "telemetry") {
      const payload = frame.payload as TelemetryPayload;
      this.state.pose = payload.mechanisms;
      this.state.active = payload.active;
      this.state.bedClock = payload.ts;
    } else {
      this.applyDecision(frame.payload as DecisionPayload);
    }
    this.emit();
  }

  private applyDecision(decision: DecisionPayload): void {
    this.state.requestInFlight = false;
    const entry: TranscriptEntry = {
      id: this.nextEntryId++,
      role: "agent",
      kind: decision.kind === "execute" ? "response" : decision.kind === "clarify" ? "question" : "refusal",
      text: decision.response ?? decision.question ?? decision.reason ?? "",
      state: "confirmed",
      seq: decision.request_seq,
    };
    // keep server ordering: place the answer right after its request
    const anchor = this.state.transcript.findIndex(
      (e) => e.kind === "request" && e.seq === decision.request_seq,
    );
    if (anchor === -1) {
      this.state.transcript.push(entry);
    } else {
      this.state.transcript.splice(anchor + 1, 0, entry);
    }
  }

  // --- user actions ----------------------------------------------------------------

  private push(entry: Omit<TranscriptEntry, "id">): TranscriptEntry {
    const full: TranscriptEntry = { ...entry, id: this.nextEntryId++ };
    this.state.transcript.push(full);
    this.emit();
    return full;
  }

  async sendRequest(text: string): Promise<void> {
    const sessionId = this.requireSession();
    const entry = this.push({ role: "patient", kind: "request", text, state: "pending" });
    this.state.requestInFlight = true;
    this.emit();
    try {
      entry.seq = await this.client.sendRequest(sessionId, text);
      entry.state = "confirmed";
    } catch (err) {
      entry.state = "error";
      entry.error = describe(err);
      this.state.requestInFlight = false;
    }
    this.emit();
  }

  async interrupt(): Promise<void> {
    const sessionId = this.requireSession();
    const entry = this.push({ role: "system", kind: "notice", text: "interrupt", state: "pending" });
    try {
      await this.client.interrupt(sessionId);
      entry.state = "confirmed";
    } catch (err) {
      entry.state = "error";
      entry.error = describe(err);
    }
    this.emit();
  }

  async sendFeedback(scores: Record<MetricName, number>): Promise<void> {
    const sessionId = this.requireSession();
    const entry = this.push({ role: "system", kind: "notice", text: "feedback", state: "pending" });
    this.state.feedbackInFlight = true;
    this.emit();
    const countBefore = this.state.updateCount;
    try {
      await this.client.sendFeedback(sessionId, scores);
      entry.state = "confirmed";
      // the agent applies feedback asynchronously; poll until the persisted
      // state reflects it (bounded), then show the new weights
      for (let i = 0; i < this.pollLimit; i++) {
        await this.refreshEqualizer();
        if (this.state.updateCount > countBefore) break;
        await sleep(this.pollMs);
      }
    } catch (err) {
      entry.state = "error";
      entry.error = describe(err);
    }
    this.state.feedbackInFlight = false;
    this.emit();
  }

  async refreshEqualizer(): Promise<void> {
    const sessionId = this.requireSession();
    const eq = await this.client.fetchEqualizer(sessionId);
    this.state.weights = eq.weights;
    this.state.updateCount = eq.update_count;
    this.emit();
  }

  private requireSession(): string {
    if (!this.state.sessionId) throw new Error("session not open yet");
    return this.state.sessionId;
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  return String(err);
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export const MECHANISM_ORDER: readonly MechanismName[] = MECHANISM_NAMES;
