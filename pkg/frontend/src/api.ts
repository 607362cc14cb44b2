/**
 * Typed client for the labeling service. Every view in the UI is fed from
 * these responses; nothing is recomputed client-side.
 */

export interface QueryCard {
  point_index: number;
  features: number[];
  score: number;
  mean_depth: number;
  uncertainty: number;
  rank: number;
  pool_size: number;
  budget_left: number;
  feature_percentiles: number[];
}

export interface Metrics {
  ap: number;
  auc: number;
}

export interface SessionSummary {
  session_id: string;
  status: string;
  budget: number;
  budget_used: number;
  pool_size: number;
  n_train: number;
  n_features: number;
  query_strategy: string;
  update_strategy: string;
  outstanding: number | null;
  outstanding_query?: QueryCard;
  has_eval: boolean;
  metrics?: Metrics;
}

export interface ScoreEntry {
  index: number;
  score: number;
  labeled: boolean;
  features?: number[];
}

export interface HistoryEntry {
  iteration: number;
  index: number;
  label: string;
  metrics?: Metrics;
}

export interface HistoryResponse {
  status: string;
  entries: HistoryEntry[];
  baseline_metrics?: Metrics;
}

export interface CreateResponse {
  session_id: string;
  status: string;
  baseline: Record<string, unknown>;
}

export interface LabelResponse {
  status: string;
  point_index: number;
  label?: string;
  abstained?: boolean;
  previous_score?: number;
  new_score?: number;
  rescored_points?: number;
  budget_left: number;
  metrics?: Metrics;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

export class SessionApi {
  constructor(
    private base: string = "",
    private token?: string,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const headers: Record<string, string> = {
      "content-type": "application/json",
      ...(this.token ? { "x-auth-token": this.token } : {}),
    };
    const resp = await fetch(this.base + path, { ...init, headers });
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      const detail =
        typeof body === "object" && body !== null && "detail" in body
          ? String((body as { detail: unknown }).detail)
          : resp.statusText;
      throw new ApiError(resp.status, detail);
    }
    return body as T;
  }

  createSession(payload: unknown): Promise<CreateResponse> {
    return this.request("/sessions", {
      method: "POST",
      body: JSON.stringify(payload),
    });
  }

  summary(id: string): Promise<SessionSummary> {
    return this.request(`/sessions/${id}`);
  }

  requestQuery(id: string): Promise<QueryCard & { status: string }> {
    return this.request(`/sessions/${id}/query`, { method: "POST" });
  }

  submitLabel(
    id: string,
    pointIndex: number,
    label: "normal" | "anomaly",
  ): Promise<LabelResponse> {
    return this.request(`/sessions/${id}/labels`, {
      method: "POST",
      body: JSON.stringify({ point_index: pointIndex, label }),
    });
  }

  abstain(id: string, pointIndex: number): Promise<LabelResponse> {
    return this.request(`/sessions/${id}/labels`, {
      method: "POST",
      body: JSON.stringify({ point_index: pointIndex, abstain: true }),
    });
  }

  scores(id: string, top?: number, features = false): Promise<{ status: string; scores: ScoreEntry[] }> {
    const params = new URLSearchParams();
    if (top !== undefined) params.set("top", String(top));
    if (features) params.set("features", "true");
    const qs = params.toString();
    return this.request(`/sessions/${id}/scores${qs ? "?" + qs : ""}`);
  }

  history(id: string): Promise<HistoryResponse> {
    return this.request(`/sessions/${id}/history`);
  }
}
