"""Model A: bind Bayesian-network posteriors onto knowledge-graph edges.

An external network is admitted through a four-requirement gate (same
domain, source metadata present, acyclic, properly directed). Admitted
posteriors are stamped onto edges as weights, each carrying provenance that
names the network, the query, and the evidence, so an operator can always
trace where a number came from. Everything else in the graph is left
untouched.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .bayes import BayesianNetwork, infer_posterior, validate_bn
from .errors import (
    BindingResolutionError,
    FormatError,
    GateFailedError,
    UnknownEdgeError,
    UnweightedEdgeError,
    ZeroProbabilityEvidenceError,
)
from .graph import (
    KnowledgeGraph,
    SourceMeta,
    _require_keys,
    _text,
    _text_map,
    canonical_json,
    rfc3339_now,
)

GATE_REQUIREMENTS = ("RQ1", "RQ2", "RQ3", "RQ4")

# Characters reserved by the query citation notation (see _encode_query).
_RESERVED = ("|", "=", ",", "(", ")")


@dataclass
class RequirementVerdict:
    passed: bool
    reason: str

    def to_doc(self) -> dict:
        return {"passed": self.passed, "reason": self.reason}


@dataclass
class FusionGateReport:
    """Per-requirement admission verdicts for an external network."""

    requirements: dict[str, RequirementVerdict]

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.requirements.values())

    def failed_requirements(self) -> list[str]:
        return [name for name in GATE_REQUIREMENTS if not self.requirements[name].passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "requirements": {name: self.requirements[name].to_doc() for name in GATE_REQUIREMENTS},
        }


def _normalize_domain(tag: str, aliases: dict[str, str] | None) -> str:
    normalized = tag.strip().casefold()
    if aliases:
        folded = {k.strip().casefold(): v.strip().casefold() for k, v in aliases.items()}
        normalized = folded.get(normalized, normalized)
    return normalized


def check_fusion_gate(
    kg_main: KnowledgeGraph,
    bn: BayesianNetwork,
    *,
    domain_aliases: dict[str, str] | None = None,
) -> FusionGateReport:
    """Evaluate the four admission requirements.

    RQ1 compares domain tags case-insensitively (optionally through an alias
    table). RQ2 demands source metadata on the network. RQ3 and RQ4 come from
    structural validation: directed cycles fail RQ3; mutual parent pairs
    (edges without a determinate direction) fail RQ4.
    """
    verdicts: dict[str, RequirementVerdict] = {}

    kg_domain = _normalize_domain(kg_main.domain_tag, domain_aliases)
    bn_domain = _normalize_domain(bn.domain_tag, domain_aliases)
    if kg_domain == bn_domain:
        verdicts["RQ1"] = RequirementVerdict(True, f"domains match ({kg_main.domain_tag!r})")
    else:
        verdicts["RQ1"] = RequirementVerdict(
            False, f"domain mismatch: graph {kg_main.domain_tag!r} vs network {bn.domain_tag!r}"
        )

    if bn.source is not None and bn.source.source_id.strip():
        verdicts["RQ2"] = RequirementVerdict(True, f"source metadata present ({bn.source.source_id!r})")
    else:
        verdicts["RQ2"] = RequirementVerdict(False, "network carries no source metadata")

    report = validate_bn(bn)
    cycles = report.by_kind("cycle")
    if cycles:
        witness = cycles[0].detail["cycle"]
        verdicts["RQ3"] = RequirementVerdict(False, f"cycle: {' -> '.join(witness)}")
    else:
        verdicts["RQ3"] = RequirementVerdict(True, "parent relation is acyclic")

    mutual = report.by_kind("mutual-parents")
    if mutual:
        verdicts["RQ4"] = RequirementVerdict(False, "; ".join(v.message for v in mutual))
    else:
        verdicts["RQ4"] = RequirementVerdict(True, "all relations have a determinate direction")

    return FusionGateReport(requirements=verdicts)


# ---------------------------------------------------------------------------
# Bindings
# ---------------------------------------------------------------------------

@dataclass
class EdgeBinding:
    """Declares that one edge's weight is the posterior of a network query."""

    edge_id: str
    query_variable: str
    query_state: str
    evidence: dict[str, str] = field(default_factory=dict)
    source_bn_id: str = ""

    def to_doc(self) -> dict:
        return {
            "edge_id": self.edge_id,
            "query_variable": self.query_variable,
            "query_state": self.query_state,
            "evidence": dict(sorted(self.evidence.items())),
            "source_bn_id": self.source_bn_id,
        }

    @classmethod
    def from_doc(cls, doc: dict, path: str = "binding") -> "EdgeBinding":
        _require_keys(doc, {"edge_id", "query_variable", "query_state", "evidence", "source_bn_id"}, set(), path)
        return cls(
            edge_id=_text(doc, "edge_id", path),
            query_variable=_text(doc, "query_variable", path),
            query_state=_text(doc, "query_state", path),
            evidence=_text_map(doc, "evidence", path),
            source_bn_id=_text(doc, "source_bn_id", path),
        )


def dumps_bindings(bindings: list[EdgeBinding]) -> str:
    return canonical_json([b.to_doc() for b in bindings])


def loads_bindings(text: str) -> list[EdgeBinding]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg} (line {exc.lineno})", line=exc.lineno) from None
    if not isinstance(doc, list):
        raise FormatError("binding file must be a JSON array")
    bindings = []
    for i, item in enumerate(doc):
        if not isinstance(item, dict):
            raise FormatError(f"bindings[{i}] must be an object")
        bindings.append(EdgeBinding.from_doc(item, f"bindings[{i}]"))
    return bindings


def load_bindings(path: str | Path) -> list[EdgeBinding]:
    return loads_bindings(Path(path).read_text(encoding="utf-8"))


def save_bindings(bindings: list[EdgeBinding], path: str | Path) -> None:
    Path(path).write_text(dumps_bindings(bindings), encoding="utf-8")


# ---------------------------------------------------------------------------
# Query citation notation
# ---------------------------------------------------------------------------

def _check_name(name: str, role: str) -> None:
    for ch in _RESERVED:
        if ch in name:
            raise BindingResolutionError(f"{role} {name!r} contains reserved character {ch!r}")


def _encode_query(query_variable: str, query_state: str, evidence: dict[str, str]) -> str:
    """Canonical audit string, e.g. ``P(ASA=t | Male=t)``; evidence sorted by
    variable name. Variable and state names must avoid ``| = , ( )``."""
    _check_name(query_variable, "query variable")
    _check_name(query_state, "query state")
    for var, state in evidence.items():
        _check_name(var, "evidence variable")
        _check_name(state, "evidence state")
    head = f"{query_variable}={query_state}"
    if not evidence:
        return f"P({head})"
    tail = ", ".join(f"{v}={s}" for v, s in sorted(evidence.items()))
    return f"P({head} | {tail})"


def _decode_query(citation: str) -> tuple[str, str, dict[str, str]] | None:
    if not citation or not citation.startswith("P(") or not citation.endswith(")"):
        return None
    body = citation[2:-1]
    head, _, tail = body.partition(" | ")
    if "=" not in head:
        return None
    query_variable, _, query_state = head.partition("=")
    evidence: dict[str, str] = {}
    if tail:
        for item in tail.split(", "):
            if "=" not in item:
                return None
            var, _, state = item.partition("=")
            evidence[var] = state
    return query_variable, query_state, evidence


# ---------------------------------------------------------------------------
# Applying bindings
# ---------------------------------------------------------------------------

@dataclass
class BindingApplication:
    edge_id: str
    previous_weight: float | None
    new_weight: float
    query: str

    def to_doc(self) -> dict:
        return {
            "edge_id": self.edge_id,
            "previous_weight": self.previous_weight,
            "new_weight": self.new_weight,
            "query": self.query,
        }


def apply_bindings(
    kg_main: KnowledgeGraph,
    bn: BayesianNetwork,
    bindings: list[EdgeBinding],
    *,
    domain_aliases: dict[str, str] | None = None,
    ingested_at: str | None = None,
) -> tuple[KnowledgeGraph, list[BindingApplication]]:
    """Stamp each binding's posterior onto its edge in a fresh copy of the
    graph. All-or-nothing: every posterior is computed before anything is
    written, so a failing binding leaves no partial result.

    ``ingested_at`` pins the provenance timestamp for reproducible audits.
    """
    gate = check_fusion_gate(kg_main, bn, domain_aliases=domain_aliases)
    if not gate.passed:
        raise GateFailedError(
            "fusion gate failed: " + ", ".join(gate.failed_requirements()), report=gate
        )

    seen: set[str] = set()
    for binding in bindings:
        if binding.edge_id in seen:
            raise BindingResolutionError(f"duplicate binding for edge {binding.edge_id!r}")
        seen.add(binding.edge_id)
        if binding.edge_id not in kg_main.edges:
            raise BindingResolutionError(f"binding references unknown edge {binding.edge_id!r}")
        if bn.source is not None and binding.source_bn_id != bn.source.source_id:
            raise BindingResolutionError(
                f"binding for edge {binding.edge_id!r} names network {binding.source_bn_id!r},"
                f" got {bn.source.source_id!r}"
            )

    timestamp = ingested_at or rfc3339_now()
    applications: list[BindingApplication] = []
    posteriors: dict[str, float] = {}
    for binding in bindings:
        citation = _encode_query(binding.query_variable, binding.query_state, binding.evidence)
        try:
            dist = infer_posterior(bn, binding.query_variable, binding.evidence)
        except ZeroProbabilityEvidenceError as exc:
            raise ZeroProbabilityEvidenceError(
                f"binding for edge {binding.edge_id!r}: {exc}"
            ) from None
        if binding.query_state not in dist:
            raise BindingResolutionError(
                f"binding for edge {binding.edge_id!r}: variable {binding.query_variable!r}"
                f" has no state {binding.query_state!r}"
            )
        posteriors[binding.edge_id] = dist[binding.query_state]
        applications.append(
            BindingApplication(
                edge_id=binding.edge_id,
                previous_weight=kg_main.edges[binding.edge_id].weight,
                new_weight=dist[binding.query_state],
                query=citation,
            )
        )

    weighted = kg_main.copy()
    for binding in bindings:
        edge = weighted.edges[binding.edge_id]
        edge.weight = posteriors[binding.edge_id]
        edge.weight_provenance = SourceMeta(
            source_id=binding.source_bn_id,
            source_kind="bayesian-network",
            ingested_at=timestamp,
            citation=_encode_query(binding.query_variable, binding.query_state, binding.evidence),
        )
    return weighted, applications


# ---------------------------------------------------------------------------
# Explanations
# ---------------------------------------------------------------------------

@dataclass
class WeightExplanation:
    """Where an edge weight came from: the network, the query, the evidence,
    and when it was stamped. Non-network weights yield the provenance fields
    only."""

    edge_id: str
    value: float
    source_id: str
    source_kind: str
    ingested_at: str
    query_variable: str | None = None
    query_state: str | None = None
    evidence: dict[str, str] | None = None
    citation: str | None = None

    def to_dict(self) -> dict:
        return {
            "edge_id": self.edge_id,
            "value": self.value,
            "source_id": self.source_id,
            "source_kind": self.source_kind,
            "ingested_at": self.ingested_at,
            "query_variable": self.query_variable,
            "query_state": self.query_state,
            "evidence": self.evidence,
            "citation": self.citation,
        }


def explain_weight(graph: KnowledgeGraph, edge_id: str) -> WeightExplanation:
    edge = graph.edges.get(edge_id)
    if edge is None:
        raise UnknownEdgeError(f"unknown edge {edge_id!r}")
    if edge.weight is None or edge.weight_provenance is None:
        raise UnweightedEdgeError(f"edge {edge_id!r} carries no weight")
    meta = edge.weight_provenance
    explanation = WeightExplanation(
        edge_id=edge_id,
        value=edge.weight,
        source_id=meta.source_id,
        source_kind=meta.source_kind,
        ingested_at=meta.ingested_at,
        citation=meta.citation,
    )
    if meta.source_kind == "bayesian-network" and meta.citation:
        decoded = _decode_query(meta.citation)
        if decoded is not None:
            explanation.query_variable, explanation.query_state, explanation.evidence = decoded
    return explanation
