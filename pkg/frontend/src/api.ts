/** Typed client for the gateway HTTP API. The dashboard computes nothing the
 * gateway already knows; every displayed value comes straight from these
 * payloads. */

import type {
  AppDetail,
  AppStatus,
  InfraPayload,
  LinkDetailPayload,
  NodeDetailPayload,
  QueuedResponse,
  ServiceHistoryPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  listApps(): Promise<{ apps: AppStatus[] }> {
    return this.request("/apps");
  }

  appDetail(appId: string): Promise<AppDetail> {
    return this.request(`/apps/${encodeURIComponent(appId)}`);
  }

  putFiles(
    appId: string,
    files: { compose?: string; requirements?: string },
  ): Promise<QueuedResponse> {
    return this.request(`/apps/${encodeURIComponent(appId)}/files`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(files),
    });
  }

  execApp(appId: string): Promise<QueuedResponse> {
    return this.request(`/apps/${encodeURIComponent(appId)}/exec`, { method: "POST" });
  }

  removeApp(appId: string): Promise<QueuedResponse> {
    return this.request(`/apps/${encodeURIComponent(appId)}`, { method: "DELETE" });
  }

  infra(): Promise<InfraPayload> {
    return this.request("/infra");
  }

  nodeDetail(nodeId: string): Promise<NodeDetailPayload> {
    return this.request(`/infra/nodes/${encodeURIComponent(nodeId)}`);
  }

  linkDetail(src: string, dst: string): Promise<LinkDetailPayload> {
    return this.request(
      `/infra/links/${encodeURIComponent(src)}/${encodeURIComponent(dst)}`,
    );
  }

  serviceHistory(): Promise<ServiceHistoryPayload> {
    return this.request("/history/services");
  }
}
