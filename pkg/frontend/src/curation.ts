/**
 * Curation page: knowledge-engineering operations (gate check, weight
 * fusion, graph merge), kept apart from the live operator walkthrough.
 */

import { ApiClient, ApiError } from "./api";
import type { GateReport } from "./types";

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderGateReport(container: HTMLElement, report: GateReport): void {
  container.textContent = "";
  const table = el("table", "gate-report");
  const header = el("tr");
  for (const title of ["requirement", "verdict", "reason"]) {
    header.appendChild(el("th", undefined, title));
  }
  table.appendChild(header);
  for (const [name, verdict] of Object.entries(report.requirements)) {
    const row = el("tr", verdict.passed ? "pass" : "fail");
    row.appendChild(el("td", undefined, name));
    row.appendChild(el("td", undefined, verdict.passed ? "pass" : "FAIL"));
    row.appendChild(el("td", undefined, verdict.reason));
    table.appendChild(row);
  }
  container.appendChild(table);
  container.appendChild(
    el("p", report.passed ? "gate-verdict pass" : "gate-verdict fail",
       report.passed ? "Source admitted." : "Source rejected."),
  );
}

export function mountCurationPage(root: Document = document): void {
  const api = new ApiClient("");
  const output = root.getElementById("curation-output") as HTMLElement;
  const errors = root.getElementById("curation-error") as HTMLElement;

  const report = (fn: () => Promise<void>) => {
    errors.textContent = "";
    fn().catch((error: unknown) => {
      errors.textContent =
        error instanceof ApiError ? `${error.message} (${error.code})` : String(error);
    });
  };

  const gateForm = root.getElementById("gate-form") as HTMLFormElement | null;
  gateForm?.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(gateForm);
    report(async () => {
      const result = await api.checkGate(String(data.get("graph_id")), String(data.get("bn_id")));
      renderGateReport(output, result);
    });
  });

  const weightsForm = root.getElementById("weights-form") as HTMLFormElement | null;
  weightsForm?.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(weightsForm);
    report(async () => {
      const bindings = JSON.parse(String(data.get("bindings") || "[]")) as unknown[];
      const result = await api.fuseWeights(
        String(data.get("graph_id")),
        String(data.get("bn_id")),
        bindings,
        String(data.get("out_id") || "") || undefined,
      );
      output.textContent = "";
      const list = el("ul", "weight-report");
      for (const application of result.report) {
        list.appendChild(el(
          "li", undefined,
          `${application.edge_id}: ${application.previous_weight ?? "unweighted"}`
          + ` -> ${application.new_weight} (${application.query})`,
        ));
      }
      output.appendChild(list);
    });
  });

  const mergeForm = root.getElementById("merge-form") as HTMLFormElement | null;
  mergeForm?.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(mergeForm);
    report(async () => {
      const source = JSON.parse(String(data.get("source") || "{}"));
      const result = await api.fuseMerge(
        String(data.get("graph_id")),
        source,
        String(data.get("out_id") || "") || undefined,
      );
      output.textContent = "";
      const pre = el("pre", "merge-report");
      pre.textContent = JSON.stringify(result.report, null, 2);
      output.appendChild(pre);
    });
  });
}
