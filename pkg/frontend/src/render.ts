/**
 * DOM renderers for the operator page. Each renderer replaces the contents
 * of its container with the given view model; no state lives in the DOM.
 */

import type { GraphView, RecommendationRow, EvidenceFormModel, WhatIfRow } from "./viewmodel";

const SVG_NS = "http://www.w3.org/2000/svg";

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) el.setAttribute(key, value);
  return el;
}

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

// ── graph ──

export function renderGraph(container: HTMLElement, view: GraphView): void {
  container.textContent = "";
  const svg = svgEl("svg", {
    width: String(view.layout.width),
    height: String(view.layout.height),
    class: "graph-canvas",
  });

  for (const edge of view.edges) {
    const from = view.layout.positions.get(edge.source);
    const to = view.layout.positions.get(edge.target);
    if (!from || !to) continue;
    const line = svgEl("line", {
      x1: String(from.x),
      y1: String(from.y),
      x2: String(to.x),
      y2: String(to.y),
      class: edge.onVisitedPath ? "edge visited" : "edge",
      "data-edge-id": edge.id,
    });
    svg.appendChild(line);
    if (edge.weightText !== null) {
      const label = svgEl("text", {
        x: String((from.x + to.x) / 2),
        y: String((from.y + to.y) / 2 - 6),
        class: "edge-weight",
      });
      label.textContent = edge.weightText;
      svg.appendChild(label);
    }
  }

  for (const node of view.nodes) {
    const pos = view.layout.positions.get(node.id);
    if (!pos) continue;
    const classes = ["node", `type-${node.nodeType}`];
    if (node.current) classes.push("current");
    if (node.visited) classes.push("visited");
    const circle = svgEl("circle", {
      cx: String(pos.x),
      cy: String(pos.y),
      r: "18",
      class: classes.join(" "),
      "data-node-id": node.id,
    });
    svg.appendChild(circle);
    const label = svgEl("text", {
      x: String(pos.x),
      y: String(pos.y + 34),
      "text-anchor": "middle",
      class: "node-label",
    });
    label.textContent = node.label;
    svg.appendChild(label);
  }
  container.appendChild(svg);
}

// ── recommendation panel ──

export function renderRecommendations(
  container: HTMLElement,
  rows: RecommendationRow[],
  onStep: (edgeId: string) => void,
): void {
  container.textContent = "";
  if (rows.length === 0) {
    container.appendChild(el("p", "empty", "No outgoing steps from the current node."));
    return;
  }
  const list = el("ol", "recommendations");
  for (const row of rows) {
    const item = el("li", "step");
    item.dataset.edgeId = row.edgeId;
    item.dataset.rank = String(row.rank);

    item.appendChild(el("span", "rank", String(row.rank)));
    item.appendChild(el("span", "target", row.targetLabel));
    item.appendChild(el("span", "weight", row.weightText));

    const provenance = el("span", row.assumed ? "provenance assumed" : "provenance", row.provenanceLabel);
    provenance.title = row.provenanceDetail; // popover with the full chain
    item.appendChild(provenance);

    if (row.error) {
      item.appendChild(el("span", "step-error", row.error));
    } else {
      const button = el("button", "advance", "Take step") as HTMLButtonElement;
      button.addEventListener("click", () => onStep(row.edgeId));
      item.appendChild(button);
    }
    list.appendChild(item);
  }
  container.appendChild(list);
}

// ── evidence form ──

export function renderEvidenceForm(
  container: HTMLElement,
  model: EvidenceFormModel,
  onSubmit: (variable: string, state: string) => void,
): void {
  container.textContent = "";
  if (model.variables.length === 0) {
    container.appendChild(el("p", "empty", "No network bound to this session."));
    return;
  }
  const variableSelect = el("select", "evidence-variable") as HTMLSelectElement;
  const stateSelect = el("select", "evidence-state") as HTMLSelectElement;

  const fillStates = (variableName: string) => {
    stateSelect.textContent = "";
    const variable = model.variables.find((v) => v.name === variableName);
    for (const state of variable?.states ?? []) {
      const option = el("option", undefined, state) as HTMLOptionElement;
      option.value = state;
      stateSelect.appendChild(option);
    }
  };

  for (const variable of model.variables) {
    const option = el(
      "option",
      undefined,
      variable.observed ? `${variable.name} (= ${variable.observed})` : variable.name,
    ) as HTMLOptionElement;
    option.value = variable.name;
    variableSelect.appendChild(option);
  }
  variableSelect.addEventListener("change", () => fillStates(variableSelect.value));
  fillStates(model.variables[0].name);

  const button = el("button", "submit-evidence", "Record observation") as HTMLButtonElement;
  button.addEventListener("click", () => onSubmit(variableSelect.value, stateSelect.value));

  const observed = el("ul", "observed-evidence");
  for (const variable of model.variables) {
    if (variable.observed !== null) {
      observed.appendChild(el("li", undefined, `${variable.name} = ${variable.observed}`));
    }
  }

  container.append(variableSelect, stateSelect, button, observed);
}

// ── what-if panel ──

export function renderWhatIf(container: HTMLElement, rows: WhatIfRow[]): void {
  container.textContent = "";
  if (rows.length === 0) {
    container.appendChild(el("p", "empty", "No path to the chosen end node."));
    return;
  }
  const list = el("ol", "what-if");
  for (const row of rows) {
    const item = el("li", "path-option");
    item.appendChild(el("span", "path-nodes", row.labels.join(" → ")));
    item.appendChild(el("span", "path-probability", row.probabilityText));
    if (row.assumed) item.appendChild(el("span", "assumed-flag", "assumed"));
    list.appendChild(item);
  }
  container.appendChild(list);
}

// ── banners ──

export function renderBanner(container: HTMLElement, message: string | null): void {
  container.textContent = "";
  if (message !== null) {
    container.appendChild(el("div", "error-banner", message));
  }
}

export function renderInlineError(container: HTMLElement, message: string | null): void {
  container.textContent = "";
  if (message !== null) {
    container.appendChild(el("div", "inline-error", message));
  }
}
