// Thin REST client for the platform API. Every method either resolves with
// the parsed body or throws ApiError with the HTTP status and detail text.

import type { EqualizerState, MetricName } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export type FetchLike = typeof fetch;

export class PlatformClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async post(path: string, body?: unknown): Promise<any> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(0, `network failure: ${String(err)}`);
    }
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return response.json();
  }

  private async get(path: string): Promise<any> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`);
    } catch (err) {
      throw new ApiError(0, `network failure: ${String(err)}`);
    }
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return response.json();
  }

  async createSession(): Promise<string> {
    const body = await this.post("/api/session");
    return body.session_id as string;
  }

  async sendRequest(sessionId: string, text: string): Promise<number> {
    const body = await this.post(`/api/session/${sessionId}/request`, { text });
    return body.seq as number;
  }

  async interrupt(sessionId: string): Promise<number> {
    const body = await this.post(`/api/session/${sessionId}/interrupt`);
    return body.seq as number;
  }

  async sendFeedback(sessionId: string, scores: Record<MetricName, number>): Promise<number> {
    const body = await this.post(`/api/session/${sessionId}/feedback`, { scores });
    return body.seq as number;
  }

  async fetchEqualizer(sessionId: string): Promise<EqualizerState> {
    return (await this.get(`/api/session/${sessionId}/equalizer`)) as EqualizerState;
  }

  async fetchLog(sessionId: string): Promise<any[]> {
    const body = await this.get(`/api/session/${sessionId}/log`);
    return body.events as any[];
  }

  streamUrl(sessionId: string): string {
    return `${this.baseUrl.replace(/^http/, "ws")}/api/session/${sessionId}/stream`;
  }
}
