"""Transitional path probabilities and interactive recommendation sessions.

A path's probability is the product of its edge weights; unweighted edges
contribute a configurable default (1.0) and are flagged as assumed so no
fabricated certainty hides in a ranking. A session tracks an operator's
position, the evidence entered so far, and an append-only event log that can
be replayed to reproduce the session exactly.

Live re-ranking: when a network is bound to the session, a step whose weight
was stamped from that network is re-scored as the posterior of its stored
query, conditioned on the stored binding evidence overridden by the session
evidence. Steps without a network-stamped weight keep their stored weight,
or the assumed default if they have none.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .bayes import BayesianNetwork, infer_posterior
from .errors import (
    ContradictoryEvidenceError,
    CyclicGraphError,
    FormatError,
    InvalidPathError,
    KgFuseError,
    NoBoundNetworkError,
    NotAnOutgoingEdgeError,
    UnknownNodeError,
    ZeroProbabilityEvidenceError,
)
from .graph import KnowledgeGraph, rfc3339_now, validate_dag
from .weighting import _decode_query, explain_weight

DEFAULT_EDGE_WEIGHT = 1.0

EVENT_KINDS = ("started", "advanced", "evidence", "recomputed")


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------

@dataclass
class TreatmentPath:
    """A simple directed path: ``edges[i]`` connects ``nodes[i]`` to
    ``nodes[i+1]``."""

    nodes: list[str]
    edges: list[str]
    context_tag: str | None = None

    @classmethod
    def from_nodes(cls, graph: KnowledgeGraph, nodes: Sequence[str], context_tag: str | None = None) -> "TreatmentPath":
        """Resolve a node sequence to edges; parallel edges resolve to the
        lexicographically smallest edge id."""
        nodes = list(nodes)
        edges: list[str] = []
        for a, b in zip(nodes, nodes[1:]):
            linking = sorted(e.id for e in graph.edges.values() if e.source == a and e.target == b)
            if not linking:
                raise InvalidPathError(f"no edge connects {a!r} to {b!r}")
            edges.append(linking[0])
        path = cls(nodes=nodes, edges=edges, context_tag=context_tag)
        _check_path(graph, path)
        return path

    def to_doc(self) -> dict:
        doc = {"nodes": list(self.nodes), "edges": list(self.edges)}
        if self.context_tag is not None:
            doc["context_tag"] = self.context_tag
        return doc


def _check_path(graph: KnowledgeGraph, path: TreatmentPath) -> None:
    if not path.nodes:
        raise InvalidPathError("path must contain at least one node")
    if len(path.edges) != len(path.nodes) - 1:
        raise InvalidPathError("path edge count must be node count minus one")
    for node_id in path.nodes:
        if node_id not in graph.nodes:
            raise InvalidPathError(f"path references unknown node {node_id!r}")
    if len(set(path.nodes)) != len(path.nodes):
        raise InvalidPathError("path repeats a node")
    for (a, b), edge_id in zip(zip(path.nodes, path.nodes[1:]), path.edges):
        edge = graph.edges.get(edge_id)
        if edge is None:
            raise InvalidPathError(f"path references unknown edge {edge_id!r}")
        if edge.source != a or edge.target != b:
            raise InvalidPathError(f"edge {edge_id!r} does not connect {a!r} to {b!r}")


@dataclass
class PathProbability:
    value: float
    assumed_edge_ids: list[str] = field(default_factory=list)

    @property
    def assumed(self) -> bool:
        return bool(self.assumed_edge_ids)

    def to_doc(self) -> dict:
        return {"value": self.value, "assumed": self.assumed, "assumed_edge_ids": list(self.assumed_edge_ids)}


def path_probability(
    graph: KnowledgeGraph,
    path: TreatmentPath | Sequence[str],
    *,
    default_weight: float = DEFAULT_EDGE_WEIGHT,
) -> PathProbability:
    """Product of edge weights along the path (1.0 for the empty product).
    Unweighted edges contribute ``default_weight`` and are flagged."""
    if not isinstance(path, TreatmentPath):
        path = TreatmentPath.from_nodes(graph, path)
    else:
        _check_path(graph, path)
    value = 1.0
    assumed: list[str] = []
    for edge_id in path.edges:
        weight = graph.edges[edge_id].weight
        if weight is None:
            assumed.append(edge_id)
            value *= default_weight
        else:
            value *= weight
    return PathProbability(value=value, assumed_edge_ids=assumed)


@dataclass
class ScoredPath:
    path: TreatmentPath
    probability: PathProbability

    def to_doc(self) -> dict:
        return {"path": self.path.to_doc(), "probability": self.probability.to_doc()}


def enumerate_paths(
    graph: KnowledgeGraph,
    start: str,
    end: str,
    max_depth: int,
    *,
    default_weight: float = DEFAULT_EDGE_WEIGHT,
) -> list[ScoredPath]:
    """All simple directed paths from start to end with at most ``max_depth``
    edges, ranked by descending probability; ties break on the node-id
    sequence, then the edge-id sequence. Refuses cyclic graphs."""
    if max_depth < 1:
        raise InvalidPathError("max_depth must be at least 1")
    for node_id in (start, end):
        if node_id not in graph.nodes:
            raise UnknownNodeError(f"unknown node {node_id!r}")
    ok, cycle = validate_dag(graph)
    if not ok:
        raise CyclicGraphError("path enumeration requires an acyclic graph", cycle=cycle)

    found: list[ScoredPath] = []

    def walk(node: str, nodes: list[str], edges: list[str]) -> None:
        if node == end:
            path = TreatmentPath(nodes=list(nodes), edges=list(edges))
            found.append(ScoredPath(path=path, probability=path_probability(graph, path, default_weight=default_weight)))
            return
        if len(edges) >= max_depth:
            return
        for edge in graph.out_edges(node):
            if edge.target in nodes:
                continue
            nodes.append(edge.target)
            edges.append(edge.id)
            walk(edge.target, nodes, edges)
            nodes.pop()
            edges.pop()

    walk(start, [start], [])
    found.sort(key=lambda sp: (-sp.probability.value, sp.path.nodes, sp.path.edges))
    return found


# ---------------------------------------------------------------------------
# Sessions
# ---------------------------------------------------------------------------

@dataclass
class SessionEvent:
    ts: str
    kind: str
    payload: dict

    def to_doc(self) -> dict:
        return {"ts": self.ts, "kind": self.kind, "payload": self.payload}

    @classmethod
    def from_doc(cls, doc: dict, path: str = "event") -> "SessionEvent":
        if not isinstance(doc, dict) or doc.keys() != {"ts", "kind", "payload"}:
            raise FormatError(f"{path}: expected keys ts, kind, payload", path=path)
        if doc["kind"] not in EVENT_KINDS:
            raise FormatError(f"{path}: unknown event kind {doc['kind']!r}", path=path)
        if not isinstance(doc["payload"], dict):
            raise FormatError(f"{path}: payload must be an object", path=path)
        return cls(ts=doc["ts"], kind=doc["kind"], payload=doc["payload"])


@dataclass
class RecommendationSession:
    """One operator's walk through a treatment graph. Single-writer: callers
    mutate a session only through the functions below, which append to the
    event log."""

    session_id: str
    graph: KnowledgeGraph
    current_node: str
    graph_id: str | None = None
    bn: BayesianNetwork | None = None
    bn_id: str | None = None
    visited: list[str] = field(default_factory=list)
    evidence: dict[str, str] = field(default_factory=dict)
    events: list[SessionEvent] = field(default_factory=list)

    def state_doc(self) -> dict:
        return {
            "session_id": self.session_id,
            "graph_id": self.graph_id,
            "bn_id": self.bn_id,
            "current_node": self.current_node,
            "visited": list(self.visited),
            "evidence": dict(sorted(self.evidence.items())),
            "event_count": len(self.events),
        }


def start_session(
    session_id: str,
    graph: KnowledgeGraph,
    start_node: str,
    *,
    bn: BayesianNetwork | None = None,
    graph_id: str | None = None,
    bn_id: str | None = None,
    ts: str | None = None,
) -> RecommendationSession:
    if start_node not in graph.nodes:
        raise UnknownNodeError(f"unknown start node {start_node!r}")
    ok, cycle = validate_dag(graph)
    if not ok:
        raise CyclicGraphError("recommendation requires an acyclic graph", cycle=cycle)
    session = RecommendationSession(
        session_id=session_id,
        graph=graph,
        current_node=start_node,
        graph_id=graph_id,
        bn=bn,
        bn_id=bn_id,
        visited=[start_node],
    )
    session.events.append(SessionEvent(
        ts=ts or rfc3339_now(),
        kind="started",
        payload={"session_id": session_id, "graph_id": graph_id, "bn_id": bn_id, "start_node": start_node},
    ))
    return session


def advance(session: RecommendationSession, edge_id: str, *, ts: str | None = None) -> RecommendationSession:
    edge = session.graph.edges.get(edge_id)
    if edge is None or edge.source != session.current_node:
        raise NotAnOutgoingEdgeError(
            f"edge {edge_id!r} does not leave current node {session.current_node!r}"
        )
    session.current_node = edge.target
    session.visited.append(edge.target)
    session.events.append(SessionEvent(ts=ts or rfc3339_now(), kind="advanced", payload={"edge_id": edge_id}))
    return session


def add_evidence(session: RecommendationSession, variable: str, state: str, *, ts: str | None = None) -> RecommendationSession:
    if session.bn is None:
        raise NoBoundNetworkError("session has no bound Bayesian network to validate evidence against")
    session.bn.state_index(variable, state)  # raises UnknownVariableOrState
    existing = session.evidence.get(variable)
    if existing is not None and existing != state:
        raise ContradictoryEvidenceError(
            f"variable {variable!r} already observed as {existing!r}; rejected {state!r}"
        )
    session.evidence[variable] = state
    session.events.append(SessionEvent(ts=ts or rfc3339_now(), kind="evidence", payload={"variable": variable, "state": state}))
    return session


# ---------------------------------------------------------------------------
# Ranking
# ---------------------------------------------------------------------------

@dataclass
class RankedStep:
    rank: int
    edge_id: str
    target: str
    target_label: str
    effective_weight: float
    assumed: bool
    explanation: dict
    error: str | None = None

    def to_doc(self) -> dict:
        return {
            "rank": self.rank,
            "edge_id": self.edge_id,
            "target": self.target,
            "target_label": self.target_label,
            "effective_weight": self.effective_weight,
            "assumed": self.assumed,
            "explanation": self.explanation,
            "error": self.error,
        }


def _live_binding(session: RecommendationSession, edge) -> tuple[str, str, dict[str, str]] | None:
    """The stored network binding behind this edge's weight, if it matches
    the session's bound network."""
    if session.bn is None or edge.weight_provenance is None:
        return None
    meta = edge.weight_provenance
    if meta.source_kind != "bayesian-network" or not meta.citation:
        return None
    if session.bn.source is not None and meta.source_id != session.bn.source.source_id:
        return None
    return _decode_query(meta.citation)


def recommend_next(
    session: RecommendationSession,
    *,
    default_weight: float = DEFAULT_EDGE_WEIGHT,
    ts: str | None = None,
    log_event: bool = True,
) -> list[RankedStep]:
    """Rank the outgoing edges of the current node by effective weight.

    With a bound network, network-stamped weights are recomputed live: the
    stored query is conditioned on the stored binding evidence overridden by
    the session evidence (live facts supersede engineering-time assumptions).
    If the query variable itself is observed, the step is pinned to 1.0 or
    0.0. Inference failures flag the step instead of dropping it.
    """
    steps: list[RankedStep] = []
    for edge in session.graph.out_edges(session.current_node):
        target_label = session.graph.nodes[edge.target].label
        binding = _live_binding(session, edge)
        if binding is not None:
            query_variable, query_state, stored_evidence = binding
            merged = dict(stored_evidence)
            merged.update(session.evidence)
            explanation = {
                "kind": "bn-live",
                "source_id": edge.weight_provenance.source_id,
                "query_variable": query_variable,
                "query_state": query_state,
                "evidence": dict(sorted(merged.items())),
                "stored_weight": edge.weight,
            }
            if query_variable in merged:
                weight = 1.0 if merged[query_variable] == query_state else 0.0
                explanation["note"] = "query variable directly observed"
                steps.append(RankedStep(0, edge.id, edge.target, target_label, weight, False, explanation))
                continue
            try:
                posterior = infer_posterior(session.bn, query_variable, merged)
                weight = posterior[query_state]
                explanation["posterior"] = weight
                steps.append(RankedStep(0, edge.id, edge.target, target_label, weight, False, explanation))
            except (ZeroProbabilityEvidenceError, KgFuseError) as exc:
                steps.append(RankedStep(
                    0, edge.id, edge.target, target_label, 0.0, False, explanation, error=str(exc)
                ))
        elif edge.weight is not None:
            explanation = explain_weight(session.graph, edge.id).to_dict()
            explanation["kind"] = "stored"
            steps.append(RankedStep(0, edge.id, edge.target, target_label, edge.weight, False, explanation))
        else:
            steps.append(RankedStep(
                0, edge.id, edge.target, target_label, default_weight, True,
                {"kind": "assumed", "note": "unweighted default"},
            ))

    steps.sort(key=lambda s: (-s.effective_weight, s.edge_id))
    for i, step in enumerate(steps, start=1):
        step.rank = i
    if log_event:
        session.events.append(SessionEvent(
            ts=ts or rfc3339_now(),
            kind="recomputed",
            payload={"node": session.current_node,
                     "steps": [{"edge_id": s.edge_id, "effective_weight": s.effective_weight, "rank": s.rank}
                               for s in steps]},
        ))
    return steps


# ---------------------------------------------------------------------------
# Event-log persistence and replay
# ---------------------------------------------------------------------------

def dumps_events(events: list[SessionEvent]) -> str:
    return "".join(json.dumps(e.to_doc(), sort_keys=True, ensure_ascii=False) + "\n" for e in events)


def loads_events(text: str) -> list[SessionEvent]:
    events: list[SessionEvent] = []
    for i, line in enumerate(text.splitlines()):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid session log line {i + 1}: {exc.msg}", line=i + 1) from None
        events.append(SessionEvent.from_doc(doc, f"events[{i}]"))
    return events


def save_session_log(session: RecommendationSession, path: str | Path) -> None:
    Path(path).write_text(dumps_events(session.events), encoding="utf-8")


def append_session_event(event: SessionEvent, path: str | Path) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(event.to_doc(), sort_keys=True, ensure_ascii=False) + "\n")


def load_session_log(path: str | Path) -> list[SessionEvent]:
    return loads_events(Path(path).read_text(encoding="utf-8"))


def replay_session(
    events: list[SessionEvent],
    graph: KnowledgeGraph,
    *,
    bn: BayesianNetwork | None = None,
) -> RecommendationSession:
    """Rebuild a session from its event log. State-changing events are
    re-applied with their original timestamps; ``recomputed`` audit events are
    preserved verbatim."""
    if not events or events[0].kind != "started":
        raise FormatError("session log must begin with a 'started' event")
    head = events[0].payload
    session = start_session(
        head["session_id"], graph, head["start_node"],
        bn=bn, graph_id=head.get("graph_id"), bn_id=head.get("bn_id"), ts=events[0].ts,
    )
    for event in events[1:]:
        if event.kind == "started":
            raise FormatError("session log contains a second 'started' event")
        if event.kind == "advanced":
            advance(session, event.payload["edge_id"], ts=event.ts)
        elif event.kind == "evidence":
            add_evidence(session, event.payload["variable"], event.payload["state"], ts=event.ts)
        elif event.kind == "recomputed":
            session.events.append(event)
    return session
