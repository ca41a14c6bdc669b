/**
 * Typed client for the kgfuse /v1 gateway.
 *
 * The fetch implementation is injectable so tests can replay recorded
 * fixtures and count round-trips. Non-2xx responses raise ApiError carrying
 * the server's machine code and message.
 */

import type {
  ApiErrorBody,
  GateReport,
  GraphDoc,
  GraphSummary,
  RankedStep,
  ScoredPath,
  SessionView,
  WeightApplication,
} from "./types";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly detail?: unknown,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "Content-Type": "application/json" } };
    if (body !== undefined) init.body = JSON.stringify(body);
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      let parsed: ApiErrorBody | null = null;
      try {
        parsed = (await response.json()) as ApiErrorBody;
      } catch {
        // non-JSON error body: fall through to a generic ApiError
      }
      throw new ApiError(
        response.status,
        parsed?.code ?? "http-error",
        parsed?.message ?? `HTTP ${response.status}`,
        parsed?.detail,
      );
    }
    return (await response.json()) as T;
  }

  // ── graphs ──

  listGraphs(): Promise<{ graphs: GraphSummary[] }> {
    return this.request("GET", "/v1/graphs");
  }

  getGraph(graphId: string): Promise<GraphDoc> {
    return this.request("GET", `/v1/graphs/${encodeURIComponent(graphId)}`);
  }

  getSubgraph(graphId: string, contextTag: string): Promise<GraphDoc> {
    const query = new URLSearchParams({ context: contextTag });
    return this.request("GET", `/v1/graphs/${encodeURIComponent(graphId)}/subgraph?${query}`);
  }

  // ── fusion (curation page) ──

  checkGate(graphId: string, bnId: string): Promise<GateReport> {
    return this.request("POST", "/v1/fusion/gate", { graph_id: graphId, bn_id: bnId });
  }

  fuseWeights(graphId: string, bnId: string, bindings: unknown[], outId?: string):
      Promise<{ graph: GraphDoc; report: WeightApplication[] }> {
    const body: Record<string, unknown> = { graph_id: graphId, bn_id: bnId, bindings };
    if (outId) body.out_id = outId;
    return this.request("POST", "/v1/fusion/weights", body);
  }

  fuseMerge(graphId: string, source: GraphDoc, outId?: string):
      Promise<{ graph: GraphDoc; report: unknown; alignment: unknown }> {
    const body: Record<string, unknown> = { graph_id: graphId, source };
    if (outId) body.out_id = outId;
    return this.request("POST", "/v1/fusion/merge", body);
  }

  // ── sessions ──

  createSession(graphId: string, startNode: string, bnId?: string | null): Promise<SessionView> {
    return this.request("POST", "/v1/sessions", {
      graph_id: graphId,
      start_node: startNode,
      bn_id: bnId ?? null,
    });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request("GET", `/v1/sessions/${encodeURIComponent(sessionId)}`);
  }

  postEvidence(sessionId: string, variable: string, state: string): Promise<SessionView> {
    return this.request("POST", `/v1/sessions/${encodeURIComponent(sessionId)}/evidence`, {
      variable,
      state,
    });
  }

  postAdvance(sessionId: string, edgeId: string): Promise<SessionView> {
    return this.request("POST", `/v1/sessions/${encodeURIComponent(sessionId)}/advance`, {
      edge_id: edgeId,
    });
  }

  getRecommendations(sessionId: string): Promise<{ steps: RankedStep[] }> {
    return this.request("GET", `/v1/sessions/${encodeURIComponent(sessionId)}/recommendations`);
  }

  getPaths(sessionId: string, end: string, maxDepth: number): Promise<{ paths: ScoredPath[] }> {
    const query = new URLSearchParams({ end, max_depth: String(maxDepth) });
    return this.request("GET", `/v1/sessions/${encodeURIComponent(sessionId)}/paths?${query}`);
  }
}
