/** Thin fetch client for the session API.  Every mutating call carries the
 * caller's expected session version so concurrent edits surface as explicit
 * 409 conflicts instead of silent overwrites. */

import type {
  BasicInfo,
  Envelope,
  LayoutGraph,
  PhaseEvent,
  SessionView,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
    public readonly sessionVersion: number,
  ) {
    super(message);
    this.name = "ApiError";
  }

  get isVersionConflict(): boolean {
    return this.status === 409;
  }
}

type FetchLike = typeof fetch;

async function unwrap<T>(response: Response): Promise<{ data: T; version: number }> {
  const body = (await response.json()) as Envelope<T>;
  if (!response.ok || !body.ok || body.data === undefined) {
    const error = body.error ?? { code: "Unknown", message: response.statusText };
    throw new ApiError(response.status, error.code, error.message, body.sessionVersion ?? 0);
  }
  return { data: body.data, version: body.sessionVersion };
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
    private readonly token?: string,
  ) {}

  private headers(): Record<string, string> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    return headers;
  }

  async createSession(info: BasicInfo): Promise<{ id: string; stage: string; version: number }> {
    const response = await this.fetchImpl(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: this.headers(),
      body: JSON.stringify(info),
    });
    const { data, version } = await unwrap<{ id: string; stage: string }>(response);
    return { ...data, version };
  }

  async getSession(id: string): Promise<SessionView> {
    const response = await this.fetchImpl(`${this.baseUrl}/sessions/${id}`, {
      headers: this.headers(),
    });
    return (await unwrap<SessionView>(response)).data;
  }

  async action(
    id: string,
    action: string,
    payload: Record<string, unknown> = {},
    expectedVersion?: number,
  ): Promise<SessionView> {
    const response = await this.fetchImpl(`${this.baseUrl}/sessions/${id}/actions`, {
      method: "POST",
      headers: this.headers(),
      body: JSON.stringify({
        action,
        payload,
        ...(expectedVersion === undefined ? {} : { expected_version: expectedVersion }),
      }),
    });
    return (await unwrap<SessionView>(response)).data;
  }

  async layout(id: string): Promise<LayoutGraph | null> {
    const response = await this.fetchImpl(`${this.baseUrl}/sessions/${id}/layout`, {
      headers: this.headers(),
    });
    return (await unwrap<LayoutGraph | null>(response)).data;
  }

  async exportArchive(id: string): Promise<ArrayBuffer> {
    const response = await this.fetchImpl(`${this.baseUrl}/sessions/${id}/export`, {
      headers: this.headers(),
    });
    if (!response.ok) {
      throw new ApiError(response.status, "ExportFailed", response.statusText, 0);
    }
    return response.arrayBuffer();
  }

  /** Read the phase stream once; the server replays history then closes. */
  async events(id: string): Promise<{ phases: PhaseEvent[]; snapshot: PhaseEvent | null }> {
    const response = await this.fetchImpl(`${this.baseUrl}/sessions/${id}/events`, {
      headers: this.headers(),
    });
    if (!response.ok) {
      throw new ApiError(response.status, "EventsFailed", response.statusText, 0);
    }
    return parseEventStream(await response.text());
  }
}

/** Parse a complete text/event-stream body into phase events and the final
 * snapshot.  Only `event:`/`data:` fields are used. */
export function parseEventStream(text: string): {
  phases: PhaseEvent[];
  snapshot: PhaseEvent | null;
} {
  const phases: PhaseEvent[] = [];
  let snapshot: PhaseEvent | null = null;
  for (const block of text.split("\n\n")) {
    let eventName = "message";
    let data = "";
    for (const line of block.split("\n")) {
      if (line.startsWith("event:")) eventName = line.slice(6).trim();
      else if (line.startsWith("data:")) data += line.slice(5).trim();
    }
    if (!data) continue;
    const parsed = JSON.parse(data) as PhaseEvent;
    if (eventName === "snapshot") snapshot = parsed;
    else phases.push(parsed);
  }
  return { phases, snapshot };
}
