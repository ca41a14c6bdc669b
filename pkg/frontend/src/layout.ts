/**
 * Layered left-to-right graph layout.
 *
 * Treatment paths read as flows, so nodes are placed in columns by their
 * longest-path depth (a topological layering): every edge points from a
 * strictly earlier column to a later one. Pure geometry — no weights
 * involved.
 */

import type { GraphDoc } from "./types";

export interface NodePosition {
  id: string;
  x: number;
  y: number;
  layer: number;
}

export interface LayoutResult {
  positions: Map<string, NodePosition>;
  layers: string[][];
  width: number;
  height: number;
}

export const COLUMN_WIDTH = 170;
export const ROW_HEIGHT = 84;
export const MARGIN = 60;

/** Longest-path layering over a DAG; ties within a layer sort by label then id. */
export function layerGraph(graph: GraphDoc): string[][] {
  const indegree = new Map<string, number>();
  const outgoing = new Map<string, string[]>();
  for (const node of graph.nodes) {
    indegree.set(node.id, 0);
    outgoing.set(node.id, []);
  }
  for (const edge of graph.edges) {
    indegree.set(edge.target, (indegree.get(edge.target) ?? 0) + 1);
    outgoing.get(edge.source)?.push(edge.target);
  }

  const depth = new Map<string, number>();
  const queue: string[] = [];
  for (const [id, deg] of indegree) {
    if (deg === 0) {
      depth.set(id, 0);
      queue.push(id);
    }
  }
  let processed = 0;
  while (queue.length > 0) {
    const id = queue.shift()!;
    processed += 1;
    for (const next of outgoing.get(id) ?? []) {
      depth.set(next, Math.max(depth.get(next) ?? 0, (depth.get(id) ?? 0) + 1));
      const remaining = (indegree.get(next) ?? 0) - 1;
      indegree.set(next, remaining);
      if (remaining === 0) queue.push(next);
    }
  }
  if (processed < graph.nodes.length) {
    throw new Error("layout requires an acyclic graph");
  }

  const labels = new Map(graph.nodes.map((n) => [n.id, n.label]));
  const layerCount = graph.nodes.length === 0 ? 0 : Math.max(...depth.values()) + 1;
  const layers: string[][] = Array.from({ length: layerCount }, () => []);
  for (const [id, d] of depth) layers[d].push(id);
  for (const layer of layers) {
    layer.sort((a, b) =>
      (labels.get(a) ?? a).localeCompare(labels.get(b) ?? b) || a.localeCompare(b));
  }
  return layers;
}

export function layoutGraph(graph: GraphDoc): LayoutResult {
  const layers = layerGraph(graph);
  const positions = new Map<string, NodePosition>();
  let maxRows = 1;
  layers.forEach((layer, col) => {
    maxRows = Math.max(maxRows, layer.length);
    layer.forEach((id, row) => {
      positions.set(id, {
        id,
        x: MARGIN + col * COLUMN_WIDTH,
        y: MARGIN + row * ROW_HEIGHT,
        layer: col,
      });
    });
  });
  return {
    positions,
    layers,
    width: MARGIN * 2 + Math.max(0, layers.length - 1) * COLUMN_WIDTH,
    height: MARGIN * 2 + (maxRows - 1) * ROW_HEIGHT,
  };
}
