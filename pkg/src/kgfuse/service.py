"""HTTP gateway: a thin /v1 API over the library.

Every endpoint is a direct wrapper around a library call; responses are the
corresponding library result documents. State lives in flat files under the
data directory (graphs, networks, session logs); sessions are replayable from
their logs, so a restarted service reproduces identical session state.

Status codes: 400 contract violations, 404 unknown ids, 409 contradictory
evidence, 422 fusion-gate failure (body carries the gate report).
"""

from __future__ import annotations

import os
import re
import threading
import uuid
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

from .bayes import BayesianNetwork, dumps_bn, load_bn
from .config import Config
from .errors import (
    ContradictoryEvidenceError,
    FormatError,
    GateFailedError,
    KgFuseError,
    SessionNotFoundError,
    UnknownEdgeError,
    UnknownIdError,
    UnknownNodeError,
)
from .graph import KnowledgeGraph, dumps_graph, extract_context_subgraph, load_graph
from .merging import AlignmentConfig, align_nodes, merge
from .recommend import (
    RecommendationSession,
    add_evidence,
    advance,
    append_session_event,
    enumerate_paths,
    load_session_log,
    recommend_next,
    replay_session,
    start_session,
)
from .weighting import EdgeBinding, apply_bindings, check_fusion_gate, explain_weight

_ID_PATTERN = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")

_STATUS_BY_CODE = {
    "unknown-node": 404,
    "unknown-edge": 404,
    "unknown-id": 404,
    "session-not-found": 404,
    "contradictory-evidence": 409,
    "gate-failed": 422,
}


def _check_id(value: str, kind: str) -> str:
    if not _ID_PATTERN.match(value):
        raise FormatError(f"invalid {kind} id {value!r}: ids are file-name derived")
    return value


class Catalog:
    """Flat-file store for graphs and networks; ids are file-name derived.
    Ingest replaces files atomically."""

    def __init__(self, data_dir: Path):
        self.graphs_dir = data_dir / "graphs"
        self.bns_dir = data_dir / "bns"
        self.graphs_dir.mkdir(parents=True, exist_ok=True)
        self.bns_dir.mkdir(parents=True, exist_ok=True)

    def graph_ids(self) -> list[str]:
        return sorted(p.stem for p in self.graphs_dir.glob("*.json"))

    def load_graph(self, graph_id: str) -> KnowledgeGraph:
        path = self.graphs_dir / f"{graph_id}.json"
        if not path.exists():
            raise UnknownIdError(f"unknown graph {graph_id!r}")
        return load_graph(path)

    def store_graph(self, graph_id: str, graph: KnowledgeGraph) -> None:
        _atomic_write(self.graphs_dir / f"{graph_id}.json", dumps_graph(graph))

    def load_bn(self, bn_id: str) -> BayesianNetwork:
        path = self.bns_dir / f"{bn_id}.json"
        if not path.exists():
            raise UnknownIdError(f"unknown network {bn_id!r}")
        return load_bn(path)

    def store_bn(self, bn_id: str, bn: BayesianNetwork) -> None:
        _atomic_write(self.bns_dir / f"{bn_id}.json", dumps_bn(bn))


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


class SessionStore:
    """Sessions in memory plus one append-only event log file per session.
    Unknown ids are recovered from disk by replaying the log, so a restarted
    service serves identical session state."""

    def __init__(self, data_dir: Path, catalog: Catalog):
        self.sessions_dir = data_dir / "sessions"
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self.catalog = catalog
        self._sessions: dict[str, RecommendationSession] = {}
        self._flushed: dict[str, int] = {}
        self._lock = threading.Lock()

    def _log_path(self, session_id: str) -> Path:
        return self.sessions_dir / f"{session_id}.ndjson"

    def create(self, graph_id: str, start_node: str, bn_id: str | None) -> RecommendationSession:
        graph = self.catalog.load_graph(graph_id)
        bn = self.catalog.load_bn(bn_id) if bn_id else None
        session_id = uuid.uuid4().hex[:12]
        with self._lock:
            session = start_session(
                session_id, graph, start_node, bn=bn, graph_id=graph_id, bn_id=bn_id
            )
            self._sessions[session_id] = session
            self._flushed[session_id] = 0
            self._flush(session)
        return session

    def get(self, session_id: str) -> RecommendationSession:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                session = self._recover(session_id)
            return session

    def mutate(self, session_id: str, fn) -> Any:
        """Run ``fn(session)`` under the single-writer lock and flush any new
        events to the log."""
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                session = self._recover(session_id)
            result = fn(session)
            self._flush(session)
            return result

    def _flush(self, session: RecommendationSession) -> None:
        done = self._flushed.get(session.session_id, 0)
        path = self._log_path(session.session_id)
        for event in session.events[done:]:
            append_session_event(event, path)
        self._flushed[session.session_id] = len(session.events)

    def _recover(self, session_id: str) -> RecommendationSession:
        path = self._log_path(session_id)
        if not path.exists():
            raise SessionNotFoundError(f"unknown session {session_id!r}")
        events = load_session_log(path)
        head = events[0].payload
        graph = self.catalog.load_graph(head["graph_id"])
        bn = self.catalog.load_bn(head["bn_id"]) if head.get("bn_id") else None
        session = replay_session(events, graph, bn=bn)
        self._sessions[session_id] = session
        self._flushed[session_id] = len(session.events)
        return session


# ---------------------------------------------------------------------------
# Request bodies (unknown fields rejected)
# ---------------------------------------------------------------------------

class _Body(BaseModel):
    model_config = ConfigDict(extra="forbid")


class IngestGraphBody(_Body):
    id: str
    graph: dict


class GateBody(_Body):
    graph_id: str
    bn_id: str


class WeightsBody(_Body):
    graph_id: str
    bn_id: str
    bindings: list[dict]
    out_id: str | None = None
    ingested_at: str | None = None


class MergeConfigBody(_Body):
    label_similarity_threshold: float | None = None
    require_same_node_type: bool | None = None
    require_context_overlap: bool | None = None


class MergeBody(_Body):
    graph_id: str
    source: dict
    config: MergeConfigBody | None = None
    out_id: str | None = None
    ingested_at: str | None = None


class SessionCreateBody(_Body):
    graph_id: str
    start_node: str
    bn_id: str | None = None


class EvidenceBody(_Body):
    variable: str
    state: str


class AdvanceBody(_Body):
    edge_id: str


# ---------------------------------------------------------------------------
# Application
# ---------------------------------------------------------------------------

def _session_view(session: RecommendationSession) -> dict:
    view = session.state_doc()
    if session.bn is not None:
        view["bn_variables"] = [
            {"name": v.name, "states": list(v.states)} for v in session.bn.variables.values()
        ]
    else:
        view["bn_variables"] = []
    return view


def create_app(config: Config | None = None) -> FastAPI:
    config = config or Config()
    app = FastAPI(title="kgfuse gateway", version="0.1.0")
    catalog = Catalog(config.data_dir)
    store = SessionStore(config.data_dir, catalog)
    app.state.config = config
    app.state.catalog = catalog
    app.state.sessions = store

    @app.exception_handler(KgFuseError)
    async def domain_error(_request: Request, exc: KgFuseError):
        status = _STATUS_BY_CODE.get(exc.code, 400)
        return JSONResponse(
            status_code=status,
            content={"code": exc.code, "message": str(exc), "detail": exc.detail},
        )

    @app.exception_handler(RequestValidationError)
    async def contract_violation(_request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"code": "contract-violation", "message": "request body violates the contract",
                     "detail": exc.errors()},
        )

    @app.get("/health")
    async def health():
        return {"status": "ok"}

    # -- graphs ------------------------------------------------------------

    @app.get("/v1/graphs")
    def list_graphs():
        summaries = []
        for graph_id in catalog.graph_ids():
            graph = catalog.load_graph(graph_id)
            summaries.append({
                "id": graph_id,
                "domain_tag": graph.domain_tag,
                "node_count": len(graph.nodes),
                "edge_count": len(graph.edges),
            })
        return {"graphs": summaries}

    @app.post("/v1/graphs", status_code=201)
    def ingest_graph(body: IngestGraphBody):
        _check_id(body.id, "graph")
        graph = KnowledgeGraph.from_doc(body.graph)
        catalog.store_graph(body.id, graph)
        return {"id": body.id}

    @app.get("/v1/graphs/{graph_id}")
    def get_graph(graph_id: str):
        return catalog.load_graph(graph_id).to_doc()

    @app.get("/v1/graphs/{graph_id}/subgraph")
    def get_subgraph(graph_id: str, context: list[str] = Query(default=[])):
        graph = catalog.load_graph(graph_id)
        return extract_context_subgraph(graph, context).to_doc()

    # -- fusion ------------------------------------------------------------

    @app.post("/v1/fusion/gate")
    def fusion_gate(body: GateBody):
        graph = catalog.load_graph(body.graph_id)
        bn = catalog.load_bn(body.bn_id)
        return check_fusion_gate(graph, bn, domain_aliases=config.domain_aliases).to_dict()

    @app.post("/v1/fusion/weights")
    def fusion_weights(body: WeightsBody):
        graph = catalog.load_graph(body.graph_id)
        bn = catalog.load_bn(body.bn_id)
        bindings = [EdgeBinding.from_doc(b, f"bindings[{i}]") for i, b in enumerate(body.bindings)]
        weighted, applications = apply_bindings(
            graph, bn, bindings,
            domain_aliases=config.domain_aliases, ingested_at=body.ingested_at,
        )
        if body.out_id:
            _check_id(body.out_id, "graph")
            catalog.store_graph(body.out_id, weighted)
        return {"graph": weighted.to_doc(), "report": [a.to_doc() for a in applications]}

    @app.post("/v1/fusion/merge")
    def fusion_merge(body: MergeBody):
        graph = catalog.load_graph(body.graph_id)
        source = KnowledgeGraph.from_doc(body.source)
        base = config.alignment_config()
        values = {
            "label_similarity_threshold": base.label_similarity_threshold,
            "require_same_node_type": base.require_same_node_type,
            "require_context_overlap": base.require_context_overlap,
        }
        if body.config is not None:
            values.update({k: v for k, v in body.config.model_dump().items() if v is not None})
        try:
            alignment_config = AlignmentConfig(**values)
        except ValueError as exc:
            raise FormatError(str(exc)) from None
        alignment = align_nodes(graph, source, alignment_config)
        fused, report = merge(graph, source, alignment, ingested_at=body.ingested_at)
        if body.out_id:
            _check_id(body.out_id, "graph")
            catalog.store_graph(body.out_id, fused)
        return {"graph": fused.to_doc(), "report": report.to_dict(), "alignment": alignment.to_dict()}

    # -- edges -------------------------------------------------------------

    @app.get("/v1/edges/{edge_id}/explanation")
    def edge_explanation(edge_id: str, graph: str):
        loaded = catalog.load_graph(graph)
        return explain_weight(loaded, edge_id).to_dict()

    # -- sessions ------------------------------------------------------------

    @app.post("/v1/sessions", status_code=201)
    def create_session(body: SessionCreateBody):
        session = store.create(body.graph_id, body.start_node, body.bn_id)
        return _session_view(session)

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        return _session_view(store.get(session_id))

    @app.post("/v1/sessions/{session_id}/evidence")
    def post_evidence(session_id: str, body: EvidenceBody):
        return store.mutate(
            session_id,
            lambda s: _session_view(add_evidence(s, body.variable, body.state)),
        )

    @app.post("/v1/sessions/{session_id}/advance")
    def post_advance(session_id: str, body: AdvanceBody):
        return store.mutate(
            session_id,
            lambda s: _session_view(advance(s, body.edge_id)),
        )

    @app.get("/v1/sessions/{session_id}/recommendations")
    def get_recommendations(session_id: str):
        steps = store.mutate(
            session_id,
            lambda s: recommend_next(s, default_weight=config.default_edge_weight),
        )
        return {"steps": [s.to_doc() for s in steps]}

    @app.get("/v1/sessions/{session_id}/paths")
    def get_paths(session_id: str, end: str, max_depth: int = 8):
        session = store.get(session_id)
        scored = enumerate_paths(
            session.graph, session.current_node, end, max_depth,
            default_weight=config.default_edge_weight,
        )
        return {"paths": [sp.to_doc() for sp in scored]}

    return app


def run(config: Config) -> None:  # pragma: no cover - thin uvicorn wrapper
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port)
