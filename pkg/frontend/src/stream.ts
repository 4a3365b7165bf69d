// WebSocket stream with capped-backoff reconnect. The socket constructor is
// injected so the browser uses native WebSocket and tests can pass the `ws`
// package; connection state changes always reach the UI (never silent).

import type { StreamFrame } from "./types.js";

export type ConnectionState = "connecting" | "open" | "reconnecting" | "closed";

export interface SocketLike {
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  close(): void;
  readyState: number;
  send(data: string): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface StreamCallbacks {
  onFrame: (frame: StreamFrame) => void;
  onState: (state: ConnectionState) => void;
}

const INITIAL_BACKOFF_MS = 500;
const MAX_BACKOFF_MS = 8000;

export class StreamClient {
  private socket: SocketLike | null = null;
  private backoffMs = INITIAL_BACKOFF_MS;
  private stopped = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly url: string,
    private readonly callbacks: StreamCallbacks,
    private readonly makeSocket: SocketFactory,
  ) {}

  start(): void {
    this.stopped = false;
    this.open();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer) clearTimeout(this.timer);
    this.socket?.close();
    this.callbacks.onState("closed");
  }

  private open(): void {
    this.callbacks.onState(this.backoffMs === INITIAL_BACKOFF_MS ? "connecting" : "reconnecting");
    const socket = this.makeSocket(this.url);
    this.socket = socket;

    socket.onopen = () => {
      this.backoffMs = INITIAL_BACKOFF_MS;
      this.callbacks.onState("open");
    };
    socket.onmessage = (ev) => {
      try {
        this.callbacks.onFrame(JSON.parse(String(ev.data)) as StreamFrame);
      } catch {
        // non-JSON frames (keepalives) are ignored
      }
    };
    socket.onclose = () => {
      if (this.stopped) return;
      this.callbacks.onState("reconnecting");
      this.timer = setTimeout(() => this.open(), this.backoffMs);
      this.backoffMs = Math.min(this.backoffMs * 2, MAX_BACKOFF_MS);
    };
    socket.onerror = () => {
      // onclose follows and owns the reconnect
    };
  }
}
