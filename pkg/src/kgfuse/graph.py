"""Directed, typed, provenance-carrying property graph for treatment pathways.

Nodes and edges carry source metadata so that every piece of knowledge in a
graph remains attributable after fusion. Graphs are held fully in memory and
persisted as canonical JSON files (UTF-8, arrays sorted by id), which keeps
them diff-able and auditable at desk scale.

Mutation discipline: a graph instance is built by a single writer via
``add_node``/``add_edge``; fusion operations never touch their inputs and
return fresh copies instead.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

from .errors import (
    CyclicGraphError,
    DanglingEndpointError,
    DuplicateIdError,
    FormatError,
    InvalidWeightError,
    SelfLoopError,
)

SOURCE_KINDS = frozenset({"manual", "external-graph", "bayesian-network", "operator", "derived"})

BUILTIN_NODE_TYPES = ("treatment-step", "inquiry", "medication", "symptom", "situation", "generic")

_node_type_registry: set[str] = set(BUILTIN_NODE_TYPES)


def register_node_type(name: str) -> None:
    """Extend the node-type registry with a domain-specific type tag."""
    if not name or not name.strip():
        raise ValueError("node type name must be nonempty")
    _node_type_registry.add(name)


def registered_node_types() -> frozenset[str]:
    return frozenset(_node_type_registry)


def rfc3339_now() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat().replace("+00:00", "Z")


def check_rfc3339(value: str) -> str:
    """Validate an RFC 3339 timestamp string, returning it unchanged."""
    try:
        parsed = datetime.fromisoformat(value.replace("Z", "+00:00"))
    except (ValueError, AttributeError, TypeError):
        raise ValueError(f"not an RFC 3339 timestamp: {value!r}") from None
    if parsed.tzinfo is None:
        raise ValueError(f"timestamp lacks a UTC offset: {value!r}")
    return value


@dataclass
class SourceMeta:
    """Provenance record attached to nodes, edges, and edge weights."""

    source_id: str
    source_kind: str
    ingested_at: str
    citation: str | None = None

    def __post_init__(self):
        if not self.source_id or not self.source_id.strip():
            raise ValueError("source_id must be nonempty")
        if self.source_kind not in SOURCE_KINDS:
            raise ValueError(f"unknown source_kind {self.source_kind!r}; expected one of {sorted(SOURCE_KINDS)}")
        check_rfc3339(self.ingested_at)

    def to_doc(self) -> dict:
        doc = {"source_id": self.source_id, "source_kind": self.source_kind, "ingested_at": self.ingested_at}
        if self.citation is not None:
            doc["citation"] = self.citation
        return doc

    @classmethod
    def from_doc(cls, doc: dict, path: str = "provenance") -> "SourceMeta":
        _require_keys(doc, {"source_id", "source_kind", "ingested_at"}, {"citation"}, path)
        try:
            return cls(
                source_id=_text(doc, "source_id", path),
                source_kind=_text(doc, "source_kind", path),
                ingested_at=_text(doc, "ingested_at", path),
                citation=_opt_text(doc, "citation", path),
            )
        except ValueError as exc:
            raise FormatError(str(exc), path=path) from None


@dataclass
class Node:
    """A typed graph node: a treatment step, inquiry, medication, etc."""

    id: str
    label: str
    node_type: str
    provenance: SourceMeta
    context_tags: set[str] = field(default_factory=set)
    attributes: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.id or not self.id.strip():
            raise ValueError("node id must be nonempty")
        if not self.label or not self.label.strip():
            raise ValueError(f"node {self.id!r}: label must be nonempty")
        if self.node_type not in _node_type_registry:
            raise ValueError(
                f"node {self.id!r}: unregistered node_type {self.node_type!r}"
                f" (registered: {sorted(_node_type_registry)})"
            )

    def to_doc(self) -> dict:
        return {
            "id": self.id,
            "label": self.label,
            "node_type": self.node_type,
            "context_tags": sorted(self.context_tags),
            "attributes": dict(sorted(self.attributes.items())),
            "provenance": self.provenance.to_doc(),
        }

    @classmethod
    def from_doc(cls, doc: dict, path: str = "node") -> "Node":
        _require_keys(doc, {"id", "label", "node_type", "context_tags", "attributes", "provenance"}, set(), path)
        try:
            return cls(
                id=_text(doc, "id", path),
                label=_text(doc, "label", path),
                node_type=_text(doc, "node_type", path),
                context_tags=set(_text_list(doc, "context_tags", path)),
                attributes=_text_map(doc, "attributes", path),
                provenance=SourceMeta.from_doc(_obj(doc, "provenance", path), f"{path}.provenance"),
            )
        except ValueError as exc:
            raise FormatError(str(exc), path=path) from None

    def __eq__(self, other):
        return isinstance(other, Node) and self.to_doc() == other.to_doc()


@dataclass
class Edge:
    """A directed relation between two nodes; weight, when present, is a
    probability in [0, 1] and must carry its own provenance."""

    id: str
    source: str
    target: str
    relation_type: str
    provenance: SourceMeta
    weight: float | None = None
    weight_provenance: SourceMeta | None = None

    def __post_init__(self):
        if not self.id or not self.id.strip():
            raise ValueError("edge id must be nonempty")
        if self.source == self.target:
            raise SelfLoopError(f"edge {self.id!r}: self-loop on node {self.source!r}")
        if self.weight is not None:
            if not isinstance(self.weight, (int, float)) or isinstance(self.weight, bool):
                raise InvalidWeightError(f"edge {self.id!r}: weight must be numeric")
            if not 0.0 <= float(self.weight) <= 1.0:
                raise InvalidWeightError(f"edge {self.id!r}: weight {self.weight} outside [0, 1]")
            if self.weight_provenance is None:
                raise InvalidWeightError(f"edge {self.id!r}: weighted edge requires weight_provenance")
            self.weight = float(self.weight)
        elif self.weight_provenance is not None:
            raise InvalidWeightError(f"edge {self.id!r}: weight_provenance present without weight")

    def to_doc(self) -> dict:
        doc = {
            "id": self.id,
            "source": self.source,
            "target": self.target,
            "relation_type": self.relation_type,
            "provenance": self.provenance.to_doc(),
        }
        if self.weight is not None:
            doc["weight"] = self.weight
            doc["weight_provenance"] = self.weight_provenance.to_doc()
        return doc

    @classmethod
    def from_doc(cls, doc: dict, path: str = "edge") -> "Edge":
        _require_keys(
            doc,
            {"id", "source", "target", "relation_type", "provenance"},
            {"weight", "weight_provenance"},
            path,
        )
        weight = doc.get("weight")
        if weight is not None and (not isinstance(weight, (int, float)) or isinstance(weight, bool)):
            raise FormatError(f"{path}.weight must be a number", path=path)
        wp = doc.get("weight_provenance")
        try:
            return cls(
                id=_text(doc, "id", path),
                source=_text(doc, "source", path),
                target=_text(doc, "target", path),
                relation_type=_text(doc, "relation_type", path),
                provenance=SourceMeta.from_doc(_obj(doc, "provenance", path), f"{path}.provenance"),
                weight=weight,
                weight_provenance=(
                    SourceMeta.from_doc(wp, f"{path}.weight_provenance") if wp is not None else None
                ),
            )
        except ValueError as exc:
            raise FormatError(str(exc), path=path) from None

    def __eq__(self, other):
        return isinstance(other, Edge) and self.to_doc() == other.to_doc()


@dataclass
class KnowledgeGraph:
    """In-memory property graph; all referential invariants hold after every
    mutating call."""

    domain_tag: str
    nodes: dict[str, Node] = field(default_factory=dict)
    edges: dict[str, Edge] = field(default_factory=dict)
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.domain_tag or not self.domain_tag.strip():
            raise ValueError("domain_tag must be nonempty")

    def add_node(self, node: Node) -> None:
        if node.id in self.nodes:
            raise DuplicateIdError(f"node id {node.id!r} already present")
        self.nodes[node.id] = node

    def add_edge(self, edge: Edge) -> None:
        if edge.id in self.edges:
            raise DuplicateIdError(f"edge id {edge.id!r} already present")
        for endpoint in (edge.source, edge.target):
            if endpoint not in self.nodes:
                raise DanglingEndpointError(f"edge {edge.id!r}: endpoint {endpoint!r} not in graph")
        self.edges[edge.id] = edge

    def out_edges(self, node_id: str) -> list[Edge]:
        """Edges leaving ``node_id``, sorted by edge id for determinism."""
        return sorted((e for e in self.edges.values() if e.source == node_id), key=lambda e: e.id)

    def copy(self) -> "KnowledgeGraph":
        return copy.deepcopy(self)

    def all_context_tags(self) -> set[str]:
        tags: set[str] = set()
        for node in self.nodes.values():
            tags |= node.context_tags
        return tags

    def to_doc(self) -> dict:
        return {
            "domain_tag": self.domain_tag,
            "metadata": dict(sorted(self.metadata.items())),
            "nodes": [self.nodes[k].to_doc() for k in sorted(self.nodes)],
            "edges": [self.edges[k].to_doc() for k in sorted(self.edges)],
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "KnowledgeGraph":
        if not isinstance(doc, dict):
            raise FormatError("graph document must be a JSON object")
        _require_keys(doc, {"domain_tag", "metadata", "nodes", "edges"}, set(), "graph")
        try:
            graph = cls(domain_tag=_text(doc, "domain_tag", "graph"), metadata=_text_map(doc, "metadata", "graph"))
        except ValueError as exc:
            raise FormatError(str(exc), path="graph") from None
        nodes = doc["nodes"]
        edges = doc["edges"]
        if not isinstance(nodes, list) or not isinstance(edges, list):
            raise FormatError("graph.nodes and graph.edges must be arrays", path="graph")
        for i, node_doc in enumerate(nodes):
            if not isinstance(node_doc, dict):
                raise FormatError(f"nodes[{i}] must be an object", path=f"nodes[{i}]")
            graph.add_node(Node.from_doc(node_doc, f"nodes[{i}]"))
        for i, edge_doc in enumerate(edges):
            if not isinstance(edge_doc, dict):
                raise FormatError(f"edges[{i}] must be an object", path=f"edges[{i}]")
            graph.add_edge(Edge.from_doc(edge_doc, f"edges[{i}]"))
        return graph

    def __eq__(self, other):
        return isinstance(other, KnowledgeGraph) and self.to_doc() == other.to_doc()


# ---------------------------------------------------------------------------
# Structural operations
# ---------------------------------------------------------------------------

def validate_dag(graph: KnowledgeGraph) -> tuple[bool, list[str] | None]:
    """Check acyclicity. Returns ``(True, None)`` or ``(False, cycle)`` where
    the cycle witness is a node sequence whose first and last entries match.

    Deterministic: nodes and adjacency are visited in sorted id order, so the
    witness for a given graph is stable.
    """
    adjacency: dict[str, list[str]] = {nid: [] for nid in graph.nodes}
    for edge in sorted(graph.edges.values(), key=lambda e: e.id):
        adjacency[edge.source].append(edge.target)
    for targets in adjacency.values():
        targets.sort()

    WHITE, GRAY, BLACK = 0, 1, 2
    color = {nid: WHITE for nid in graph.nodes}

    for start in sorted(graph.nodes):
        if color[start] != WHITE:
            continue
        # Iterative DFS keeping the gray path for witness extraction.
        path: list[str] = []
        stack: list[tuple[str, int]] = [(start, 0)]
        color[start] = GRAY
        path.append(start)
        while stack:
            node, idx = stack[-1]
            targets = adjacency[node]
            if idx < len(targets):
                stack[-1] = (node, idx + 1)
                nxt = targets[idx]
                if color[nxt] == GRAY:
                    cycle = path[path.index(nxt):] + [nxt]
                    return False, cycle
                if color[nxt] == WHITE:
                    color[nxt] = GRAY
                    path.append(nxt)
                    stack.append((nxt, 0))
            else:
                color[node] = BLACK
                path.pop()
                stack.pop()
    return True, None


def topological_order(graph: KnowledgeGraph) -> list[str]:
    """Kahn's algorithm with lexicographic tie-breaking among ready nodes."""
    import heapq

    indegree = {nid: 0 for nid in graph.nodes}
    adjacency: dict[str, list[str]] = {nid: [] for nid in graph.nodes}
    for edge in graph.edges.values():
        indegree[edge.target] += 1
        adjacency[edge.source].append(edge.target)

    ready = [nid for nid, deg in indegree.items() if deg == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        node = heapq.heappop(ready)
        order.append(node)
        for target in adjacency[node]:
            indegree[target] -= 1
            if indegree[target] == 0:
                heapq.heappush(ready, target)
    if len(order) != len(graph.nodes):
        _, cycle = validate_dag(graph)
        raise CyclicGraphError("graph contains a directed cycle", cycle=cycle)
    return order


def extract_context_subgraph(graph: KnowledgeGraph, context_tags: Iterable[str]) -> KnowledgeGraph:
    """Induced subgraph of nodes whose context tags intersect the query set.

    Provenance is preserved verbatim; edges survive only when both endpoints
    are retained. The result may be empty.
    """
    query = set(context_tags)
    sub = KnowledgeGraph(domain_tag=graph.domain_tag, metadata=dict(graph.metadata))
    for nid in sorted(graph.nodes):
        node = graph.nodes[nid]
        if node.context_tags & query:
            sub.add_node(copy.deepcopy(node))
    for eid in sorted(graph.edges):
        edge = graph.edges[eid]
        if edge.source in sub.nodes and edge.target in sub.nodes:
            sub.add_edge(copy.deepcopy(edge))
    return sub


# ---------------------------------------------------------------------------
# Canonical JSON persistence
# ---------------------------------------------------------------------------

def canonical_json(doc: dict) -> str:
    """Canonical file form: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def dumps_graph(graph: KnowledgeGraph) -> str:
    return canonical_json(graph.to_doc())


def loads_graph(text: str, *, allow_cycles: bool = False) -> KnowledgeGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg} (line {exc.lineno})", line=exc.lineno) from None
    graph = KnowledgeGraph.from_doc(doc)
    if not allow_cycles:
        ok, cycle = validate_dag(graph)
        if not ok:
            raise CyclicGraphError(
                f"graph contains a directed cycle: {' -> '.join(cycle)}"
                " (load with allow_cycles=True to permit)",
                cycle=cycle,
            )
    return graph


def save_graph(graph: KnowledgeGraph, path: str | Path) -> None:
    Path(path).write_text(dumps_graph(graph), encoding="utf-8")


def load_graph(path: str | Path, *, allow_cycles: bool = False) -> KnowledgeGraph:
    return loads_graph(Path(path).read_text(encoding="utf-8"), allow_cycles=allow_cycles)


# ---------------------------------------------------------------------------
# Strict document parsing helpers (shared with the other file formats)
# ---------------------------------------------------------------------------

def _require_keys(doc: dict, required: set[str], optional: set[str], path: str) -> None:
    missing = required - doc.keys()
    if missing:
        raise FormatError(f"{path}: missing key(s) {sorted(missing)}", path=path)
    unknown = doc.keys() - required - optional
    if unknown:
        raise FormatError(f"{path}: unexpected key(s) {sorted(unknown)}", path=path)


def _text(doc: dict, key: str, path: str) -> str:
    value = doc[key]
    if not isinstance(value, str):
        raise FormatError(f"{path}.{key} must be a string", path=path)
    return value


def _opt_text(doc: dict, key: str, path: str) -> str | None:
    value = doc.get(key)
    if value is not None and not isinstance(value, str):
        raise FormatError(f"{path}.{key} must be a string", path=path)
    return value


def _obj(doc: dict, key: str, path: str) -> dict:
    value = doc[key]
    if not isinstance(value, dict):
        raise FormatError(f"{path}.{key} must be an object", path=path)
    return value


def _text_list(doc: dict, key: str, path: str) -> list[str]:
    value = doc[key]
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise FormatError(f"{path}.{key} must be an array of strings", path=path)
    return value


def _text_map(doc: dict, key: str, path: str) -> dict[str, str]:
    value = doc[key]
    if not isinstance(value, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in value.items()
    ):
        raise FormatError(f"{path}.{key} must be an object of string values", path=path)
    return dict(value)
