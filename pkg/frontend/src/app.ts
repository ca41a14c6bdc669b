/**
 * Operator session store and page wiring.
 *
 * Single source of truth for the walkthrough view. Optimistic updates are
 * forbidden: every state change round-trips to the gateway, and the store
 * only ever holds what the server last returned. Entering evidence performs
 * exactly one evidence POST followed by exactly one recommendations GET.
 */

import { ApiClient, ApiError } from "./api";
import {
  buildEvidenceForm,
  buildGraphView,
  buildRecommendationRows,
  buildWhatIfRows,
} from "./viewmodel";
import {
  renderBanner,
  renderEvidenceForm,
  renderGraph,
  renderInlineError,
  renderRecommendations,
  renderWhatIf,
} from "./render";
import type { GraphDoc, RankedStep, ScoredPath, SessionView } from "./types";

export interface OperatorState {
  phase: "idle" | "loading" | "ready" | "failed";
  session: SessionView | null;
  subgraph: GraphDoc | null;
  recommendations: RankedStep[] | null;
  whatIf: ScoredPath[] | null;
  banner: string | null; // page-level failure (e.g. missing graph)
  inlineError: string | null; // evidence-form rejection (e.g. 409)
}

export class OperatorStore {
  state: OperatorState = {
    phase: "idle",
    session: null,
    subgraph: null,
    recommendations: null,
    whatIf: null,
    banner: null,
    inlineError: null,
  };

  private listeners: Array<(state: OperatorState) => void> = [];

  constructor(private readonly api: ApiClient) {}

  subscribe(listener: (state: OperatorState) => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  private set(partial: Partial<OperatorState>): void {
    this.state = { ...this.state, ...partial };
    this.emit();
  }

  /** Start a session and render the subgraph for the chosen context tag. */
  async startSession(graphId: string, startNode: string, bnId: string | null,
                     contextTag: string): Promise<void> {
    this.set({ phase: "loading", banner: null, inlineError: null });
    try {
      const subgraph = await this.api.getSubgraph(graphId, contextTag);
      const session = await this.api.createSession(graphId, startNode, bnId);
      const { steps } = await this.api.getRecommendations(session.session_id);
      this.set({ phase: "ready", subgraph, session, recommendations: steps, whatIf: null });
    } catch (error) {
      this.fail(error);
    }
  }

  /** Restore an existing session by id; the view derives from server state. */
  async restoreSession(sessionId: string, contextTag: string): Promise<void> {
    this.set({ phase: "loading", banner: null, inlineError: null });
    try {
      const session = await this.api.getSession(sessionId);
      const subgraph = session.graph_id
        ? await this.api.getSubgraph(session.graph_id, contextTag)
        : null;
      const { steps } = await this.api.getRecommendations(sessionId);
      this.set({ phase: "ready", session, subgraph, recommendations: steps, whatIf: null });
    } catch (error) {
      this.fail(error);
    }
  }

  /**
   * Record an observation. On success: one recomputation round-trip (a
   * single recommendations GET). On rejection (e.g. contradictory evidence):
   * surface the error inline and leave every displayed value untouched.
   */
  async enterEvidence(variable: string, state: string): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    try {
      const updated = await this.api.postEvidence(session.session_id, variable, state);
      const { steps } = await this.api.getRecommendations(session.session_id);
      this.set({ session: updated, recommendations: steps, inlineError: null });
    } catch (error) {
      if (error instanceof ApiError) {
        this.set({ inlineError: `${error.message} (${error.code})` });
      } else {
        this.fail(error);
      }
    }
  }

  /** Advance along an edge, then re-rank from the new position. */
  async step(edgeId: string): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    try {
      const updated = await this.api.postAdvance(session.session_id, edgeId);
      const { steps } = await this.api.getRecommendations(session.session_id);
      this.set({ session: updated, recommendations: steps, whatIf: null, inlineError: null });
    } catch (error) {
      if (error instanceof ApiError) {
        this.set({ inlineError: `${error.message} (${error.code})` });
      } else {
        this.fail(error);
      }
    }
  }

  /** What-if: ranked whole paths from the current node to a chosen end. */
  async whatIf(endNode: string, maxDepth = 8): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    try {
      const { paths } = await this.api.getPaths(session.session_id, endNode, maxDepth);
      this.set({ whatIf: paths, inlineError: null });
    } catch (error) {
      if (error instanceof ApiError) {
        this.set({ inlineError: `${error.message} (${error.code})` });
      } else {
        this.fail(error);
      }
    }
  }

  private fail(error: unknown): void {
    const message =
      error instanceof ApiError ? `${error.message} (${error.code})` : String(error);
    this.set({ phase: "failed", banner: message });
  }
}

// ── page wiring ──

export interface PageElements {
  graph: HTMLElement;
  recommendations: HTMLElement;
  evidence: HTMLElement;
  whatIf: HTMLElement;
  banner: HTMLElement;
  inlineError: HTMLElement;
}

export function bindOperatorPage(store: OperatorStore, elements: PageElements): void {
  store.subscribe((state) => {
    renderBanner(elements.banner, state.banner);
    renderInlineError(elements.inlineError, state.inlineError);
    if (state.subgraph) {
      renderGraph(elements.graph, buildGraphView(state.subgraph, state.session));
    }
    if (state.recommendations) {
      renderRecommendations(
        elements.recommendations,
        buildRecommendationRows(state.recommendations),
        (edgeId) => void store.step(edgeId),
      );
    }
    if (state.session) {
      renderEvidenceForm(elements.evidence, buildEvidenceForm(state.session), (variable, value) =>
        void store.enterEvidence(variable, value),
      );
    }
    if (state.whatIf && state.subgraph) {
      renderWhatIf(elements.whatIf, buildWhatIfRows(state.whatIf, state.subgraph));
    }
  });
}

export function mountOperatorApp(root: Document = document): OperatorStore {
  const store = new OperatorStore(new ApiClient(""));
  const byId = (id: string) => {
    const element = root.getElementById(id);
    if (!element) throw new Error(`missing #${id}`);
    return element as HTMLElement;
  };
  bindOperatorPage(store, {
    graph: byId("graph"),
    recommendations: byId("recommendations"),
    evidence: byId("evidence"),
    whatIf: byId("what-if"),
    banner: byId("banner"),
    inlineError: byId("inline-error"),
  });

  const form = root.getElementById("start-form") as HTMLFormElement | null;
  form?.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    void store.startSession(
      String(data.get("graph_id") || "acs_weighted"),
      String(data.get("start_node") || "n-acs"),
      String(data.get("bn_id") || "") || null,
      String(data.get("context_tag") || "acute-coronary-syndrome"),
    );
  });

  const whatIfForm = root.getElementById("what-if-form") as HTMLFormElement | null;
  whatIfForm?.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(whatIfForm);
    void store.whatIf(String(data.get("end_node") || ""));
  });

  return store;
}
