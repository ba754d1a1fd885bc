import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, parseEventStream } from "../src/api.js";

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function stubFetch(handler: (url: string, init?: RequestInit) => Response): {
  fetch: typeof fetch;
  calls: Array<{ url: string; init?: RequestInit }>;
} {
  const calls: Array<{ url: string; init?: RequestInit }> = [];
  const impl = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    calls.push({ url, init });
    return handler(url, init);
  }) as typeof fetch;
  return { fetch: impl, calls };
}

describe("ApiClient", () => {
  it("creates a session and returns id with version", async () => {
    const { fetch, calls } = stubFetch(() =>
      jsonResponse(201, {
        ok: true,
        data: { id: "abc", stage: "basic_info" },
        sessionVersion: 0,
      }),
    );
    const client = new ApiClient("http://x", fetch);
    const created = await client.createSession({ task_name: "t", domain: "d", dataset: "s" });
    expect(created).toEqual({ id: "abc", stage: "basic_info", version: 0 });
    expect(calls[0].url).toBe("http://x/sessions");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({
      task_name: "t",
      domain: "d",
      dataset: "s",
    });
  });

  it("sends expected_version with actions", async () => {
    const { fetch, calls } = stubFetch(() =>
      jsonResponse(200, { ok: true, data: { id: "abc" }, sessionVersion: 3 }),
    );
    const client = new ApiClient("http://x", fetch);
    await client.action("abc", "approve", {}, 2);
    const body = JSON.parse(String(calls[0].init?.body));
    expect(body).toEqual({ action: "approve", payload: {}, expected_version: 2 });
  });

  it("omits expected_version when not given", async () => {
    const { fetch, calls } = stubFetch(() =>
      jsonResponse(200, { ok: true, data: {}, sessionVersion: 0 }),
    );
    await new ApiClient("http://x", fetch).action("abc", "approve");
    expect("expected_version" in JSON.parse(String(calls[0].init?.body))).toBe(false);
  });

  it("raises a typed error from the error envelope", async () => {
    const { fetch } = stubFetch(() =>
      jsonResponse(409, {
        ok: false,
        error: { code: "VersionConflict", message: "expected version 1, session is at 4" },
        sessionVersion: 4,
      }),
    );
    const client = new ApiClient("http://x", fetch);
    const err = await client.action("abc", "approve", {}, 1).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(409);
    expect(err.code).toBe("VersionConflict");
    expect(err.isVersionConflict).toBe(true);
    expect(err.sessionVersion).toBe(4);
  });

  it("flags non-conflict errors accordingly", async () => {
    const { fetch } = stubFetch(() =>
      jsonResponse(422, {
        ok: false,
        error: { code: "InvalidEdit", message: "unknown concept" },
        sessionVersion: 2,
      }),
    );
    const err = await new ApiClient("http://x", fetch)
      .action("abc", "edit")
      .catch((e) => e);
    expect(err.code).toBe("InvalidEdit");
    expect(err.isVersionConflict).toBe(false);
  });

  it("attaches a bearer token when configured", async () => {
    const { fetch, calls } = stubFetch(() =>
      jsonResponse(200, { ok: true, data: {}, sessionVersion: 0 }),
    );
    await new ApiClient("http://x", fetch, "secret").getSession("abc");
    const headers = calls[0].init?.headers as Record<string, string>;
    expect(headers["Authorization"]).toBe("Bearer secret");
  });

  it("returns export bytes as an ArrayBuffer", async () => {
    const payload = new Uint8Array([80, 75, 3, 4]);
    const { fetch } = stubFetch(
      () => new Response(payload, { status: 200, headers: { "Content-Type": "application/zip" } }),
    );
    const buffer = await new ApiClient("http://x", fetch).exportArchive("abc");
    expect(new Uint8Array(buffer)).toEqual(payload);
  });
});

describe("parseEventStream", () => {
  it("splits phase events from the final snapshot", () => {
    const text =
      'event: phase\ndata: {"stage": "task_description", "phase": "started", "detail": ""}\n\n' +
      'event: phase\ndata: {"stage": "task_description", "phase": "sampling", "detail": ""}\n\n' +
      'event: snapshot\ndata: {"stage": "done", "phase": "done", "detail": "snapshot"}\n\n';
    const { phases, snapshot } = parseEventStream(text);
    expect(phases).toHaveLength(2);
    expect(phases[1].phase).toBe("sampling");
    expect(snapshot?.stage).toBe("done");
  });

  it("ignores blank blocks", () => {
    expect(parseEventStream("\n\n\n")).toEqual({ phases: [], snapshot: null });
  });
});
