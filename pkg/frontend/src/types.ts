/**
 * Wire types for the kgfuse /v1 gateway.
 *
 * These mirror the server's JSON documents exactly; the client never derives
 * or recomputes any probability — every number shown on screen comes from
 * one of these payloads.
 */

export interface SourceMeta {
  source_id: string;
  source_kind: string;
  ingested_at: string;
  citation?: string;
}

export interface NodeDoc {
  id: string;
  label: string;
  node_type: string;
  context_tags: string[];
  attributes: Record<string, string>;
  provenance: SourceMeta;
}

export interface EdgeDoc {
  id: string;
  source: string;
  target: string;
  relation_type: string;
  provenance: SourceMeta;
  weight?: number;
  weight_provenance?: SourceMeta;
}

export interface GraphDoc {
  domain_tag: string;
  metadata: Record<string, string>;
  nodes: NodeDoc[];
  edges: EdgeDoc[];
}

export interface GraphSummary {
  id: string;
  domain_tag: string;
  node_count: number;
  edge_count: number;
}

export interface BnVariable {
  name: string;
  states: string[];
}

export interface SessionView {
  session_id: string;
  graph_id: string | null;
  bn_id: string | null;
  current_node: string;
  visited: string[];
  evidence: Record<string, string>;
  event_count: number;
  bn_variables: BnVariable[];
}

export interface StepExplanation {
  kind: string; // bn-live | stored | assumed
  source_id?: string;
  query_variable?: string | null;
  query_state?: string | null;
  evidence?: Record<string, string> | null;
  posterior?: number;
  stored_weight?: number | null;
  note?: string;
  citation?: string | null;
  ingested_at?: string;
  [key: string]: unknown;
}

export interface RankedStep {
  rank: number;
  edge_id: string;
  target: string;
  target_label: string;
  effective_weight: number;
  assumed: boolean;
  explanation: StepExplanation;
  error: string | null;
}

export interface PathDoc {
  nodes: string[];
  edges: string[];
  context_tag?: string;
}

export interface PathProbabilityDoc {
  value: number;
  assumed: boolean;
  assumed_edge_ids: string[];
}

export interface ScoredPath {
  path: PathDoc;
  probability: PathProbabilityDoc;
}

export interface RequirementVerdict {
  passed: boolean;
  reason: string;
}

export interface GateReport {
  passed: boolean;
  requirements: Record<string, RequirementVerdict>;
}

export interface WeightApplication {
  edge_id: string;
  previous_weight: number | null;
  new_weight: number;
  query: string;
}

export interface FusionReportDoc {
  source_id: string;
  status: string;
  aligned_pair_count: number;
  added_nodes: string[];
  added_edges: string[];
  skipped_duplicates: string[];
  conflicts: unknown[];
  provenance: SourceMeta | null;
  error: string | null;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  detail?: unknown;
}
