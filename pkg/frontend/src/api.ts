// Thin client over the session service; the only way the console touches
// state. Fetch is injectable so tests can stub the transport.

import type { CommandResult, SessionSnapshot } from "./model.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(`HTTP ${status}: ${message}`);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    if (!resp.ok) {
      const body = await resp.text();
      throw new ApiError(resp.status, body || resp.statusText);
    }
    return (await resp.json()) as T;
  }

  async createSession(backend: string = "mock"): Promise<string> {
    const body = await this.request<{ id: string }>("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ backend }),
    });
    return body.id;
  }

  submitCommand(sessionId: string, text: string | null): Promise<CommandResult> {
    const payload = text === null ? { absent: true } : { text };
    return this.request<CommandResult>(`/sessions/${sessionId}/command`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  getState(sessionId: string): Promise<SessionSnapshot> {
    return this.request<SessionSnapshot>(`/sessions/${sessionId}/state`);
  }

  async reset(sessionId: string): Promise<void> {
    await this.request<{ ok: boolean }>(`/sessions/${sessionId}/reset`, { method: "POST" });
  }

  sliceUrl(sessionId: string, plane: string, cacheKey: number): string {
    return `${this.baseUrl}/sessions/${sessionId}/slices/${plane}?v=${cacheKey}`;
  }

  healthz(): Promise<{ status: string }> {
    return this.request<{ status: string }>("/healthz");
  }
}
