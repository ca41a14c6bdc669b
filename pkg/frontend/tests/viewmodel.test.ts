/**
 * View-model builders pass API numbers through verbatim (formatting only)
 * and derive all view state from the latest responses.
 */

import { describe, expect, it } from "vitest";
import {
  buildEvidenceForm,
  buildGraphView,
  buildWhatIfRows,
  describeExplanation,
  formatWeight,
} from "../src/viewmodel";
import type { GraphDoc, ScoredPath, SessionView } from "../src/types";
import { fixture } from "./helpers";

const subgraph = fixture<GraphDoc>("subgraph_acs.json");
const advanced = fixture<SessionView>("session_after_advance.json");
const paths = fixture<{ paths: ScoredPath[] }>("paths_to_transport.json");

describe("graph view", () => {
  it("highlights the current node and traces the visited path", () => {
    const view = buildGraphView(subgraph, advanced);
    const current = view.nodes.filter((n) => n.current);
    expect(current.map((n) => n.id)).toEqual([advanced.current_node]);
    const visited = view.nodes.filter((n) => n.visited).map((n) => n.id);
    expect(visited.sort()).toEqual([...advanced.visited].sort());
    const walked = view.edges.filter((e) => e.onVisitedPath).map((e) => e.id);
    expect(walked).toEqual(["e-meddec-asa"]);
  });

  it("shows edge weights verbatim from the document", () => {
    const view = buildGraphView(subgraph, null);
    const asa = view.edges.find((e) => e.id === "e-meddec-asa")!;
    const doc = subgraph.edges.find((e) => e.id === "e-meddec-asa")!;
    expect(asa.weightText).toBe(formatWeight(doc.weight!));
    const unweighted = view.edges.find((e) => e.id === "e-assess-vitals")!;
    expect(unweighted.weightText).toBeNull();
  });
});

describe("evidence form", () => {
  it("lists the bound network's variables and marks observed ones", () => {
    const session = fixture<SessionView>("evidence_accepted.json");
    const model = buildEvidenceForm(session);
    expect(model.variables.map((v) => v.name)).toEqual(["ASA", "Male", "Nitro"]);
    expect(model.variables.find((v) => v.name === "Male")?.observed).toBe("t");
    expect(model.variables.find((v) => v.name === "ASA")?.observed).toBeNull();
  });
});

describe("what-if rows", () => {
  it("carries path probabilities and assumed flags through unchanged", () => {
    const rows = buildWhatIfRows(paths.paths, subgraph);
    expect(rows).toHaveLength(paths.paths.length);
    rows.forEach((row, i) => {
      expect(row.probabilityText).toBe(formatWeight(paths.paths[i].probability.value));
      expect(row.assumed).toBe(paths.paths[i].probability.assumed);
    });
    expect(rows[0].labels[0]).toBe("Medication decision");
  });
});

describe("explanations", () => {
  it("renders the query chain for live network steps", () => {
    const text = describeExplanation({
      kind: "bn-live",
      source_id: "acs-history-bn",
      query_variable: "ASA",
      query_state: "t",
      evidence: { Male: "t" },
    });
    expect(text).toContain("P(ASA=t | Male=t)");
    expect(text).toContain("source: acs-history-bn");
  });

  it("explains assumed defaults", () => {
    expect(describeExplanation({ kind: "assumed" })).toContain("default is assumed");
  });
});
