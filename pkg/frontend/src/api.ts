/** Thin fetch client for the /v1 endpoints. No coding logic lives here. */

import type {
  CodeDetails,
  ErrorBody,
  SearchResponse,
  Section,
  SessionPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: ErrorBody,
  ) {
    super(`${body.error}: ${body.message}`);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

function isErrorBody(payload: unknown): payload is ErrorBody {
  return (
    typeof payload === "object" &&
    payload !== null &&
    typeof (payload as ErrorBody).error === "string" &&
    typeof (payload as ErrorBody).message === "string"
  );
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.base + path, init);
    const text = await response.text();
    let payload: unknown = null;
    try {
      payload = text ? JSON.parse(text) : null;
    } catch {
      payload = null;
    }
    if (!response.ok) {
      throw new ApiError(
        response.status,
        isErrorBody(payload)
          ? payload
          : { error: `HTTP${response.status}`, message: text },
      );
    }
    return payload as T;
  }

  search(section: Section, q: string, limit = 50): Promise<SearchResponse> {
    const params = new URLSearchParams({ q, limit: String(limit) });
    return this.request(`/v1/${section}/search?${params}`);
  }

  autocomplete(section: Section, q: string, limit = 10): Promise<string[]> {
    const params = new URLSearchParams({ q, limit: String(limit) });
    return this.request(`/v1/${section}/autocomplete?${params}`);
  }

  codeDetails(
    section: Section,
    code: string,
    selected: string[] = [],
  ): Promise<CodeDetails> {
    const params = new URLSearchParams();
    if (selected.length > 0) {
      params.set("selected", selected.join(","));
    }
    const suffix = params.toString() ? `?${params}` : "";
    return this.request(`/v1/${section}/codes/${encodeURIComponent(code)}${suffix}`);
  }

  startSession(pc: string[], pi: string[]): Promise<SessionPayload> {
    return this.request("/v1/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ pc, pi }),
    });
  }

  getSession(sessionId: string): Promise<SessionPayload> {
    return this.request(`/v1/sessions/${encodeURIComponent(sessionId)}`);
  }

  answer(
    sessionId: string,
    state: number,
    answer: string | string[],
  ): Promise<SessionPayload> {
    return this.request(`/v1/sessions/${encodeURIComponent(sessionId)}/answer`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ state, answer }),
    });
  }

  cancelSession(sessionId: string): Promise<SessionPayload> {
    return this.request(`/v1/sessions/${encodeURIComponent(sessionId)}`, {
      method: "DELETE",
    });
  }
}
