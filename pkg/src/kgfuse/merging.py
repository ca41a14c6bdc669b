"""Model B: contextual alignment and merging of external treatment graphs.

Nodes of an external graph are matched against the main graph by node type,
context-tag overlap, and label similarity; matched nodes are identified with
their main counterparts, everything genuinely new is added with its original
provenance, and the whole operation is audited in a fusion report. The main
graph is authoritative: its labels, types, weights, and attribute values are
never overwritten, and a merge that would close a directed cycle is rejected
as a whole.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    CycleIntroducedError,
    InvalidAlignmentError,
    KgFuseError,
    UnknownNodeInAlignmentError,
)
from .graph import KnowledgeGraph, SourceMeta, rfc3339_now, validate_dag


@dataclass
class AlignmentConfig:
    label_similarity_threshold: float = 0.85
    require_same_node_type: bool = True
    require_context_overlap: bool = True

    def __post_init__(self):
        if not 0.0 <= self.label_similarity_threshold <= 1.0:
            raise ValueError("label_similarity_threshold must lie in [0, 1]")


def normalize_label(label: str) -> str:
    """Case-fold, replace punctuation with spaces, collapse whitespace, and
    sort tokens. Token sorting makes reorderings like ``12-lead ECG`` vs
    ``ECG (12-lead)`` compare as equal."""
    cleaned = "".join(ch if ch.isalnum() else " " for ch in label.casefold())
    return " ".join(sorted(cleaned.split()))


def levenshtein(a: str, b: str) -> int:
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (ca != cb),
            ))
        previous = current
    return previous[-1]


def label_similarity(a: str, b: str) -> float:
    """Normalized Levenshtein similarity of the two normalized labels, in
    [0, 1]; 1.0 means the normalized forms coincide."""
    na, nb = normalize_label(a), normalize_label(b)
    if na == nb:
        return 1.0
    longest = max(len(na), len(nb))
    return 1.0 - levenshtein(na, nb) / longest


@dataclass
class AlignedPair:
    main_id: str
    infused_id: str
    similarity: float
    matched_tags: list[str]

    def to_doc(self) -> dict:
        return {
            "main_id": self.main_id,
            "infused_id": self.infused_id,
            "similarity": self.similarity,
            "matched_tags": list(self.matched_tags),
        }


@dataclass
class NodeAlignment:
    """Injective pairing of main and infused nodes plus the leftovers."""

    pairs: list[AlignedPair]
    unmatched_infused: list[str]

    def identification(self) -> dict[str, str]:
        return {p.infused_id: p.main_id for p in self.pairs}

    def to_dict(self) -> dict:
        return {
            "pairs": [p.to_doc() for p in self.pairs],
            "unmatched_infused": list(self.unmatched_infused),
        }


def align_nodes(
    kg_main: KnowledgeGraph,
    kg_infused: KnowledgeGraph,
    config: AlignmentConfig | None = None,
) -> NodeAlignment:
    """Greedy best-first pairing: admissible candidates are scored by label
    similarity, then taken in descending score order (ties broken by main id,
    then infused id) while keeping the pairing injective both ways."""
    config = config or AlignmentConfig()
    candidates: list[tuple[float, str, str, list[str]]] = []
    for main_id in sorted(kg_main.nodes):
        main_node = kg_main.nodes[main_id]
        for infused_id in sorted(kg_infused.nodes):
            infused_node = kg_infused.nodes[infused_id]
            if config.require_same_node_type and main_node.node_type != infused_node.node_type:
                continue
            matched = sorted(main_node.context_tags & infused_node.context_tags)
            if config.require_context_overlap and not matched:
                continue
            score = label_similarity(main_node.label, infused_node.label)
            if score >= config.label_similarity_threshold:
                candidates.append((score, main_id, infused_id, matched))

    candidates.sort(key=lambda c: (-c[0], c[1], c[2]))
    used_main: set[str] = set()
    used_infused: set[str] = set()
    pairs: list[AlignedPair] = []
    for score, main_id, infused_id, matched in candidates:
        if main_id in used_main or infused_id in used_infused:
            continue
        used_main.add(main_id)
        used_infused.add(infused_id)
        pairs.append(AlignedPair(main_id=main_id, infused_id=infused_id, similarity=score, matched_tags=matched))
    unmatched = sorted(set(kg_infused.nodes) - used_infused)
    return NodeAlignment(pairs=pairs, unmatched_infused=unmatched)


@dataclass
class AttributeConflict:
    main_id: str
    infused_id: str
    key: str
    main_value: str
    infused_value: str

    def to_doc(self) -> dict:
        return {
            "main_id": self.main_id,
            "infused_id": self.infused_id,
            "key": self.key,
            "main_value": self.main_value,
            "infused_value": self.infused_value,
        }


@dataclass
class FusionReport:
    """Audit record of one merge: what was identified, added, skipped, or
    contested, and which source it all came from."""

    source_id: str
    status: str  # applied | skipped
    aligned_pair_count: int = 0
    added_nodes: list[str] = field(default_factory=list)
    added_edges: list[str] = field(default_factory=list)
    skipped_duplicates: list[str] = field(default_factory=list)
    conflicts: list[AttributeConflict] = field(default_factory=list)
    provenance: SourceMeta | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "source_id": self.source_id,
            "status": self.status,
            "aligned_pair_count": self.aligned_pair_count,
            "added_nodes": list(self.added_nodes),
            "added_edges": list(self.added_edges),
            "skipped_duplicates": list(self.skipped_duplicates),
            "conflicts": [c.to_doc() for c in self.conflicts],
            "provenance": self.provenance.to_doc() if self.provenance else None,
            "error": self.error,
        }


def _source_id_of(graph: KnowledgeGraph) -> str:
    return graph.metadata.get("source_id", graph.domain_tag)


def _fresh_id(wanted: str, taken) -> str:
    if wanted not in taken:
        return wanted
    k = 2
    while f"{wanted}~{k}" in taken:
        k += 1
    return f"{wanted}~{k}"


def _reaches(adjacency: dict[str, set[str]], start: str, goal: str) -> bool:
    if start == goal:
        return True
    seen = {start}
    frontier = [start]
    while frontier:
        node = frontier.pop()
        for nxt in adjacency.get(node, ()):
            if nxt == goal:
                return True
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return False


def merge(
    kg_main: KnowledgeGraph,
    kg_infused: KnowledgeGraph,
    alignment: NodeAlignment,
    *,
    ingested_at: str | None = None,
) -> tuple[KnowledgeGraph, FusionReport]:
    """Merge the infused graph into a copy of the main graph.

    Aligned infused nodes are identified with their main counterparts (the
    main node stays; missing attributes are adopted, contested ones recorded
    and left alone; context tags are unioned). Unaligned nodes and re-targeted
    edges are added with their provenance verbatim; an edge duplicating an
    existing (source, target, relation_type) triple is skipped. If the main
    graph is acyclic, an edge that would close a cycle aborts the merge.
    """
    ident: dict[str, str] = {}
    seen_main: set[str] = set()
    for pair in alignment.pairs:
        if pair.main_id not in kg_main.nodes:
            raise UnknownNodeInAlignmentError(f"alignment names unknown main node {pair.main_id!r}")
        if pair.infused_id not in kg_infused.nodes:
            raise UnknownNodeInAlignmentError(f"alignment names unknown infused node {pair.infused_id!r}")
        if pair.infused_id in ident:
            raise InvalidAlignmentError(f"infused node {pair.infused_id!r} aligned twice")
        if pair.main_id in seen_main:
            raise InvalidAlignmentError(f"main node {pair.main_id!r} aligned twice")
        ident[pair.infused_id] = pair.main_id
        seen_main.add(pair.main_id)

    main_acyclic, _ = validate_dag(kg_main)
    fused = kg_main.copy()
    report = FusionReport(
        source_id=_source_id_of(kg_infused),
        status="applied",
        aligned_pair_count=len(alignment.pairs),
        provenance=SourceMeta(
            source_id=_source_id_of(kg_infused),
            source_kind="external-graph",
            ingested_at=ingested_at or rfc3339_now(),
            citation=kg_infused.metadata.get("citation"),
        ),
    )

    for pair in alignment.pairs:
        main_node = fused.nodes[pair.main_id]
        infused_node = kg_infused.nodes[pair.infused_id]
        for key in sorted(infused_node.attributes):
            value = infused_node.attributes[key]
            if key not in main_node.attributes:
                main_node.attributes[key] = value
            elif main_node.attributes[key] != value:
                report.conflicts.append(AttributeConflict(
                    main_id=pair.main_id,
                    infused_id=pair.infused_id,
                    key=key,
                    main_value=main_node.attributes[key],
                    infused_value=value,
                ))
        main_node.context_tags |= infused_node.context_tags

    for infused_id in sorted(kg_infused.nodes):
        if infused_id in ident:
            continue
        node = kg_infused.nodes[infused_id].__class__(**_node_fields(kg_infused.nodes[infused_id]))
        new_id = _fresh_id(infused_id, fused.nodes)
        node.id = new_id
        fused.add_node(node)
        ident[infused_id] = new_id
        report.added_nodes.append(new_id)

    adjacency: dict[str, set[str]] = {nid: set() for nid in fused.nodes}
    for edge in fused.edges.values():
        adjacency[edge.source].add(edge.target)
    existing_triples = {(e.source, e.target, e.relation_type) for e in fused.edges.values()}

    for edge_id in sorted(kg_infused.edges):
        infused_edge = kg_infused.edges[edge_id]
        source = ident[infused_edge.source]
        target = ident[infused_edge.target]
        triple = (source, target, infused_edge.relation_type)
        if triple in existing_triples:
            report.skipped_duplicates.append(edge_id)
            continue
        if main_acyclic and _reaches(adjacency, target, source):
            raise CycleIntroducedError(
                f"infused edge {edge_id!r} ({source} -> {target}) would close a directed cycle",
                edge_id=edge_id,
            )
        new_id = _fresh_id(edge_id, fused.edges)
        edge = infused_edge.__class__(**{**_edge_fields(infused_edge), "id": new_id, "source": source, "target": target})
        fused.add_edge(edge)
        adjacency[source].add(target)
        existing_triples.add(triple)
        report.added_edges.append(new_id)

    return fused, report


def _node_fields(node) -> dict:
    return {
        "id": node.id,
        "label": node.label,
        "node_type": node.node_type,
        "provenance": node.provenance,
        "context_tags": set(node.context_tags),
        "attributes": dict(node.attributes),
    }


def _edge_fields(edge) -> dict:
    return {
        "id": edge.id,
        "source": edge.source,
        "target": edge.target,
        "relation_type": edge.relation_type,
        "provenance": edge.provenance,
        "weight": edge.weight,
        "weight_provenance": edge.weight_provenance,
    }


def fuse_many(
    kg_main: KnowledgeGraph,
    sources: list[KnowledgeGraph],
    config: AlignmentConfig | None = None,
    *,
    ingested_at: str | None = None,
) -> tuple[KnowledgeGraph, list[FusionReport]]:
    """Left-fold align+merge over the sources in the given order. A source
    that fails (e.g. would introduce a cycle) is skipped and recorded; later
    sources are still processed against the current accumulator."""
    current = kg_main
    reports: list[FusionReport] = []
    for source in sources:
        try:
            alignment = align_nodes(current, source, config)
            current, report = merge(current, source, alignment, ingested_at=ingested_at)
        except KgFuseError as exc:
            reports.append(FusionReport(source_id=_source_id_of(source), status="skipped", error=str(exc)))
            continue
        reports.append(report)
    return current, reports
