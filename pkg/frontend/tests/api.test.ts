import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { NodesPage } from "../src/state.js";
import type { NodeDetailPayload } from "../src/types.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

describe("pass-through rendering of node history", () => {
  it("the RAM chart data equals the /infra/nodes payload exactly", async () => {
    const payload: NodeDetailPayload = {
      state: { id: "node003", free_hw: 5120, software: ["docker"], iot: [], alive: true },
      history: [
        [1, "t1", 6144],
        [2, "t2", 5321],
        [3, "t3", 5120],
      ],
      services: [{ app_id: "shop", service_id: "web" }],
    };
    const fetchMock = vi.fn(async (url: RequestInfo | URL) => {
      expect(String(url)).toBe("/infra/nodes/node003");
      return jsonResponse(payload);
    });
    const api = new ApiClient("", fetchMock as unknown as typeof fetch);
    const page = new NodesPage();
    page.selectNode("node003");
    page.applyNodeDetail(await api.nodeDetail("node003"));

    // no local aggregation: the stored series is the payload, value for value
    expect(page.nodeDetail).toEqual(payload);
    expect(page.nodeDetail!.history.map((p) => p[2])).toEqual([6144, 5321, 5120]);
  });
});

describe("client error mapping", () => {
  it("maps the gateway detail into ApiError", async () => {
    const api = new ApiClient("", async () =>
      jsonResponse({ detail: "unknown app 'ghost'" }, 404),
    );
    await expect(api.appDetail("ghost")).rejects.toThrowError(ApiError);
    await expect(api.appDetail("ghost")).rejects.toMatchObject({
      status: 404,
      detail: "unknown app 'ghost'",
    });
  });

  it("encodes path segments", async () => {
    const seen: string[] = [];
    const api = new ApiClient("", (async (url: RequestInfo | URL) => {
      seen.push(String(url));
      return jsonResponse({ queued_position: 1 });
    }) as unknown as typeof fetch);
    await api.execApp("my app");
    expect(seen).toEqual(["/apps/my%20app/exec"]);
  });
});
