import type { ClusteringPayload, LogEntry, QueryPayload, RelationChoice } from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Thin typed client over the session endpoints. */
export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.base + path, init);
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const detail = (body as { detail?: string }).detail ?? response.statusText;
      throw new ApiError(response.status, detail);
    }
    return body as T;
  }

  createSession(datasetId: string, config: Record<string, unknown>): Promise<{ session_id: string }> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ dataset_id: datasetId, config }),
    });
  }

  getQuery(sessionId: string): Promise<QueryPayload> {
    return this.request(`/sessions/${sessionId}/query`);
  }

  postAnswer(sessionId: string, relation: RelationChoice): Promise<QueryPayload> {
    return this.request(`/sessions/${sessionId}/answer`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ relation }),
    });
  }

  getClustering(sessionId: string): Promise<ClusteringPayload> {
    return this.request(`/sessions/${sessionId}/clustering`);
  }

  getLog(sessionId: string): Promise<{ log: LogEntry[] }> {
    return this.request(`/sessions/${sessionId}/log`);
  }

  abortSession(sessionId: string): Promise<{ phase: string }> {
    return this.request(`/sessions/${sessionId}`, { method: "DELETE" });
  }

  listDatasets(): Promise<{ datasets: string[] }> {
    return this.request("/datasets");
  }
}
