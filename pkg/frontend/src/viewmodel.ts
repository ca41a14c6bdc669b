/**
 * Pure view-model builders: API documents in, display structures out.
 *
 * Hard rule: no probability math on the client. Weights, ranks, and path
 * probabilities are taken verbatim from the latest API response and only
 * formatted for display; every displayed weight names its provenance source
 * or carries the "assumed" flag.
 */

import { layoutGraph, type LayoutResult } from "./layout";
import type { GraphDoc, RankedStep, ScoredPath, SessionView, StepExplanation } from "./types";

// ── graph view ──

export interface GraphEdgeView {
  id: string;
  source: string;
  target: string;
  relationType: string;
  weightText: string | null; // null: no weight to show
  onVisitedPath: boolean;
}

export interface GraphNodeView {
  id: string;
  label: string;
  nodeType: string;
  current: boolean;
  visited: boolean;
}

export interface GraphView {
  layout: LayoutResult;
  nodes: GraphNodeView[];
  edges: GraphEdgeView[];
}

export function formatWeight(value: number): string {
  return value.toFixed(3);
}

export function buildGraphView(graph: GraphDoc, session: SessionView | null): GraphView {
  const visited = new Set(session?.visited ?? []);
  const visitedEdges = new Set<string>();
  if (session) {
    // trace the walked path: consecutive visited pairs
    for (let i = 0; i + 1 < session.visited.length; i += 1) {
      const [a, b] = [session.visited[i], session.visited[i + 1]];
      for (const edge of graph.edges) {
        if (edge.source === a && edge.target === b) visitedEdges.add(edge.id);
      }
    }
  }
  return {
    layout: layoutGraph(graph),
    nodes: graph.nodes.map((node) => ({
      id: node.id,
      label: node.label,
      nodeType: node.node_type,
      current: session?.current_node === node.id,
      visited: visited.has(node.id),
    })),
    edges: graph.edges.map((edge) => ({
      id: edge.id,
      source: edge.source,
      target: edge.target,
      relationType: edge.relation_type,
      weightText: edge.weight === undefined ? null : formatWeight(edge.weight),
      onVisitedPath: visitedEdges.has(edge.id),
    })),
  };
}

// ── recommendation panel ──

export interface RecommendationRow {
  rank: number;
  edgeId: string;
  targetLabel: string;
  weightText: string;
  assumed: boolean;
  provenanceLabel: string; // "assumed" or the source id
  provenanceDetail: string; // popover text
  error: string | null;
}

export function describeExplanation(explanation: StepExplanation): string {
  if (explanation.kind === "assumed") {
    return "No stored weight; the configured default is assumed.";
  }
  const parts: string[] = [];
  if (explanation.query_variable) {
    const evidence = Object.entries(explanation.evidence ?? {})
      .map(([variable, state]) => `${variable}=${state}`)
      .join(", ");
    const head = `${explanation.query_variable}=${explanation.query_state}`;
    parts.push(evidence ? `P(${head} | ${evidence})` : `P(${head})`);
  }
  if (explanation.kind === "bn-live") parts.push("recomputed live from session evidence");
  if (explanation.note) parts.push(explanation.note);
  if (explanation.citation) parts.push(String(explanation.citation));
  if (explanation.source_id) parts.push(`source: ${explanation.source_id}`);
  return parts.join(" — ") || "stored weight";
}

export function buildRecommendationRows(steps: RankedStep[]): RecommendationRow[] {
  // Order by the API's rank field; the client never re-ranks.
  return [...steps]
    .sort((a, b) => a.rank - b.rank)
    .map((step) => ({
      rank: step.rank,
      edgeId: step.edge_id,
      targetLabel: step.target_label,
      weightText: formatWeight(step.effective_weight),
      assumed: step.assumed,
      provenanceLabel: step.assumed ? "assumed" : step.explanation.source_id ?? step.explanation.kind,
      provenanceDetail: describeExplanation(step.explanation),
      error: step.error,
    }));
}

// ── evidence form ──

export interface EvidenceFormModel {
  variables: { name: string; states: string[]; observed: string | null }[];
}

export function buildEvidenceForm(session: SessionView): EvidenceFormModel {
  return {
    variables: session.bn_variables.map((variable) => ({
      name: variable.name,
      states: [...variable.states],
      observed: session.evidence[variable.name] ?? null,
    })),
  };
}

// ── what-if panel ──

export interface WhatIfRow {
  labels: string[];
  probabilityText: string;
  assumed: boolean;
}

export function buildWhatIfRows(paths: ScoredPath[], graph: GraphDoc): WhatIfRow[] {
  const labels = new Map(graph.nodes.map((n) => [n.id, n.label]));
  return paths.map((scored) => ({
    labels: scored.path.nodes.map((id) => labels.get(id) ?? id),
    probabilityText: formatWeight(scored.probability.value),
    assumed: scored.probability.assumed,
  }));
}
