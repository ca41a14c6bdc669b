"""Path probabilities, path enumeration against a brute-force oracle, and
session semantics including log replay."""

import random

import pytest

from kgfuse.errors import (
    ContradictoryEvidenceError,
    CyclicGraphError,
    InvalidPathError,
    NoBoundNetworkError,
    NotAnOutgoingEdgeError,
    UnknownNodeError,
    UnknownVariableOrStateError,
)
from kgfuse.graph import Edge, KnowledgeGraph, Node
from kgfuse.recommend import (
    TreatmentPath,
    add_evidence,
    advance,
    dumps_events,
    enumerate_paths,
    loads_events,
    path_probability,
    recommend_next,
    replay_session,
    start_session,
)

from conftest import meta
from generators import random_dag_graph


def weighted_diamond():
    """A -> B -> D (0.7 then unweighted) and A -> C -> D (0.5 then unweighted)."""
    g = KnowledgeGraph(domain_tag="rescue-operations")
    for nid in "ABCD":
        g.add_node(Node(id=nid, label=f"step {nid}", node_type="treatment-step", provenance=meta()))
    wp = meta("demo-bn", "bayesian-network")
    g.add_edge(Edge(id="e-ab", source="A", target="B", relation_type="r", provenance=meta(),
                    weight=0.7, weight_provenance=wp))
    g.add_edge(Edge(id="e-ac", source="A", target="C", relation_type="r", provenance=meta(),
                    weight=0.5, weight_provenance=wp))
    g.add_edge(Edge(id="e-bd", source="B", target="D", relation_type="r", provenance=meta()))
    g.add_edge(Edge(id="e-cd", source="C", target="D", relation_type="r", provenance=meta()))
    return g


class TestPathProbability:
    def test_single_node_path_is_empty_product(self, main_graph):
        assert path_probability(main_graph, ["n-acs"]).value == 1.0

    def test_product_of_weights(self):
        g = weighted_diamond()
        g.edges["e-bd"].weight = 0.5
        g.edges["e-bd"].weight_provenance = meta("demo-bn", "bayesian-network")
        result = path_probability(g, ["A", "B", "D"])
        assert result.value == pytest.approx(0.35, abs=1e-15)
        assert not result.assumed

    def test_unweighted_edge_contributes_flagged_default(self):
        g = weighted_diamond()
        result = path_probability(g, ["A", "B", "D"])
        assert result.value == pytest.approx(0.7, abs=1e-15)
        assert result.assumed and result.assumed_edge_ids == ["e-bd"]

    def test_invalid_paths(self, main_graph):
        with pytest.raises(InvalidPathError):
            path_probability(main_graph, ["n-acs", "n-transport"])  # not connected
        with pytest.raises(InvalidPathError):
            path_probability(main_graph, ["n-ghost"])
        with pytest.raises(InvalidPathError):
            path_probability(main_graph, [])

    def test_concatenation_multiplies(self):
        g = weighted_diamond()
        whole = path_probability(g, ["A", "B", "D"]).value
        first = path_probability(g, ["A", "B"]).value
        second = path_probability(g, ["B", "D"]).value
        assert whole == pytest.approx(first * second, abs=1e-12)

    def test_explicit_path_object_validated(self):
        g = weighted_diamond()
        with pytest.raises(InvalidPathError):
            path_probability(g, TreatmentPath(nodes=["A", "D"], edges=["e-ab"]))


class TestEnumeratePaths:
    def test_diamond_ranking(self):
        scored = enumerate_paths(weighted_diamond(), "A", "D", 4)
        assert [sp.path.nodes for sp in scored] == [["A", "B", "D"], ["A", "C", "D"]]
        assert scored[0].probability.value == pytest.approx(0.7)
        assert scored[1].probability.value == pytest.approx(0.5)

    def test_start_equals_end(self):
        scored = enumerate_paths(weighted_diamond(), "A", "A", 3)
        assert len(scored) == 1
        assert scored[0].path.nodes == ["A"] and scored[0].probability.value == 1.0

    def test_disconnected_gives_empty_list(self):
        scored = enumerate_paths(weighted_diamond(), "D", "A", 5)
        assert scored == []

    def test_max_depth_cuts_long_paths(self):
        scored = enumerate_paths(weighted_diamond(), "A", "D", 1)
        assert scored == []

    def test_cyclic_graph_rejected(self):
        g = KnowledgeGraph(domain_tag="x")
        for nid in "AB":
            g.add_node(Node(id=nid, label=nid, node_type="generic", provenance=meta()))
        g.add_edge(Edge(id="e1", source="A", target="B", relation_type="r", provenance=meta()))
        g.add_edge(Edge(id="e2", source="B", target="A", relation_type="r", provenance=meta()))
        with pytest.raises(CyclicGraphError):
            enumerate_paths(g, "A", "B", 3)

    def test_unknown_endpoint(self):
        with pytest.raises(UnknownNodeError):
            enumerate_paths(weighted_diamond(), "A", "Z", 3)

    def _brute_force(self, graph, start, end, max_depth):
        """Independent enumerator: recursion over sorted edges, probability by
        explicit multiplication, same ordering contract."""
        results = []

        def go(node, nodes, edges, prob, assumed):
            if node == end:
                results.append((prob, list(nodes), list(edges), bool(assumed)))
                return
            if len(edges) >= max_depth:
                return
            for edge in sorted((e for e in graph.edges.values() if e.source == node), key=lambda e: e.id):
                if edge.target in nodes:
                    continue
                w = 1.0 if edge.weight is None else edge.weight
                go(edge.target, nodes + [edge.target], edges + [edge.id],
                   prob * w, assumed or edge.weight is None)

        go(start, [start], [], 1.0, False)
        results.sort(key=lambda r: (-r[0], r[1], r[2]))
        return results

    def test_matches_brute_force_on_random_dags(self):
        rng = random.Random(61)
        for _ in range(40):
            g = random_dag_graph(rng, max_nodes=8, weight_prob=0.6, edge_prob=0.45)
            node_ids = sorted(g.nodes)
            start, end = rng.choice(node_ids), rng.choice(node_ids)
            scored = enumerate_paths(g, start, end, 6)
            expected = self._brute_force(g, start, end, 6)
            assert [(sp.path.nodes, sp.path.edges) for sp in scored] == \
                [(nodes, edges) for _, nodes, edges, _ in expected]
            for sp, (prob, _, _, assumed) in zip(scored, expected):
                assert sp.probability.value == pytest.approx(prob, abs=1e-12)
                assert sp.probability.assumed == assumed

    def test_rank_order_invariant_under_sibling_scaling(self):
        rng = random.Random(67)
        for _ in range(20):
            g = random_dag_graph(rng, max_nodes=7, weight_prob=1.0, edge_prob=0.5)
            node_ids = sorted(g.nodes)
            start, end = rng.choice(node_ids), rng.choice(node_ids)
            before = [sp.path.edges for sp in enumerate_paths(g, start, end, 6)]
            factor = rng.uniform(0.1, 1.0)
            scaled = g.copy()
            for edge in scaled.edges.values():
                if edge.source == start and edge.weight is not None:
                    edge.weight *= factor
            after = [sp.path.edges for sp in enumerate_paths(scaled, start, end, 6)]
            assert before == after


class TestSessions:
    def _session(self, weighted_graph, demo_bn, node="n-meddec"):
        return start_session("s-test", weighted_graph, node, bn=demo_bn,
                             graph_id="acs_weighted", bn_id="acs_bn", ts="2025-03-02T08:00:00Z")

    def test_unknown_start_node(self, weighted_graph):
        with pytest.raises(UnknownNodeError):
            start_session("s", weighted_graph, "n-ghost")

    def test_static_ranking_uses_stored_weights(self, weighted_graph):
        session = start_session("s", weighted_graph, "n-meddec")
        steps = recommend_next(session, log_event=False)
        assert [(s.rank, s.edge_id) for s in steps] == [(1, "e-meddec-asa"), (2, "e-meddec-nitro")]
        assert steps[0].effective_weight == pytest.approx(0.7, abs=1e-12)
        assert steps[0].explanation["kind"] == "stored"

    def test_live_reranking_with_session_evidence(self, weighted_graph, demo_bn):
        session = self._session(weighted_graph, demo_bn)
        add_evidence(session, "Male", "t")
        steps = recommend_next(session, log_event=False)
        assert steps[0].edge_id == "e-meddec-asa"
        assert steps[0].effective_weight == pytest.approx(0.7, abs=1e-12)
        assert steps[0].explanation["kind"] == "bn-live"
        assert steps[0].explanation["evidence"] == {"Male": "t"}
        assert steps[1].edge_id == "e-meddec-nitro"
        assert steps[1].effective_weight == pytest.approx(0.4, abs=1e-12)

    def test_no_outgoing_edges_gives_empty_list(self, weighted_graph, demo_bn):
        session = self._session(weighted_graph, demo_bn, node="n-transport")
        assert recommend_next(session, log_event=False) == []

    def test_all_unweighted_rank_by_edge_id(self, main_graph):
        session = start_session("s", main_graph, "n-meddec")
        steps = recommend_next(session, log_event=False)
        assert [s.edge_id for s in steps] == ["e-meddec-asa", "e-meddec-nitro"]
        assert all(s.effective_weight == 1.0 and s.assumed for s in steps)

    def test_observed_query_variable_pins_step(self, weighted_graph, demo_bn):
        session = self._session(weighted_graph, demo_bn)
        add_evidence(session, "ASA", "f")
        steps = recommend_next(session, log_event=False)
        asa = next(s for s in steps if s.edge_id == "e-meddec-asa")
        assert asa.effective_weight == 0.0
        assert asa.explanation["note"] == "query variable directly observed"

    def test_advance_moves_and_logs(self, weighted_graph, demo_bn):
        session = self._session(weighted_graph, demo_bn)
        events_before = len(session.events)
        advance(session, "e-meddec-asa", ts="2025-03-02T08:01:00Z")
        assert session.current_node == "n-asa"
        assert session.visited == ["n-meddec", "n-asa"]
        assert len(session.events) == events_before + 1
        assert session.events[-1].kind == "advanced"

    def test_advance_requires_outgoing_edge(self, weighted_graph, demo_bn):
        session = self._session(weighted_graph, demo_bn)
        with pytest.raises(NotAnOutgoingEdgeError):
            advance(session, "e-assess-vitals")

    def test_contradictory_evidence_rejected_keeps_prior(self, weighted_graph, demo_bn):
        session = self._session(weighted_graph, demo_bn)
        add_evidence(session, "Male", "t")
        with pytest.raises(ContradictoryEvidenceError):
            add_evidence(session, "Male", "f")
        assert session.evidence == {"Male": "t"}

    def test_repeating_same_evidence_is_allowed(self, weighted_graph, demo_bn):
        session = self._session(weighted_graph, demo_bn)
        add_evidence(session, "Male", "t")
        add_evidence(session, "Male", "t")
        assert session.evidence == {"Male": "t"}

    def test_evidence_requires_bound_network(self, weighted_graph):
        session = start_session("s", weighted_graph, "n-meddec")
        with pytest.raises(NoBoundNetworkError):
            add_evidence(session, "Male", "t")

    def test_unknown_evidence_state(self, weighted_graph, demo_bn):
        session = self._session(weighted_graph, demo_bn)
        with pytest.raises(UnknownVariableOrStateError):
            add_evidence(session, "Male", "unsure")

    def test_event_log_is_append_only(self, weighted_graph, demo_bn):
        session = self._session(weighted_graph, demo_bn)
        snapshots = [list(session.events)]
        add_evidence(session, "Male", "t")
        snapshots.append(list(session.events))
        recommend_next(session)
        snapshots.append(list(session.events))
        advance(session, "e-meddec-asa")
        snapshots.append(list(session.events))
        for earlier, later in zip(snapshots, snapshots[1:]):
            assert later[: len(earlier)] == earlier
            assert len(later) == len(earlier) + 1

    def test_sibling_scaling_preserves_rank_order(self):
        rng = random.Random(73)
        for _ in range(15):
            g = random_dag_graph(rng, max_nodes=7, weight_prob=1.0, edge_prob=0.6)
            starts = [nid for nid in g.nodes if g.out_edges(nid)]
            if not starts:
                continue
            node = rng.choice(sorted(starts))
            before = [s.edge_id for s in
                      recommend_next(start_session("a", g, node), log_event=False)]
            factor = rng.uniform(0.05, 1.0)
            scaled = g.copy()
            for edge in scaled.out_edges(node):
                scaled.edges[edge.id].weight *= factor
            after = [s.edge_id for s in
                     recommend_next(start_session("b", scaled, node), log_event=False)]
            assert before == after

    def test_ranking_monotonic_in_weight(self):
        rng = random.Random(71)
        for _ in range(20):
            g = random_dag_graph(rng, max_nodes=7, weight_prob=1.0, edge_prob=0.6)
            starts = [nid for nid in g.nodes if g.out_edges(nid)]
            if not starts:
                continue
            node = rng.choice(sorted(starts))
            session = start_session("s", g, node)
            steps = recommend_next(session, log_event=False)
            target = rng.choice(steps)
            old_rank = target.rank
            edge = g.edges[target.edge_id]
            edge.weight = min(1.0, edge.weight + rng.uniform(0, 1 - edge.weight + 1e-9))
            session2 = start_session("s2", g, node)
            new_rank = next(s.rank for s in recommend_next(session2, log_event=False)
                            if s.edge_id == target.edge_id)
            assert new_rank <= old_rank


class TestReplay:
    def test_replay_reproduces_state_and_recommendations(self, weighted_graph, demo_bn):
        session = start_session("s-replay", weighted_graph, "n-meddec", bn=demo_bn,
                                graph_id="acs_weighted", bn_id="acs_bn", ts="2025-03-02T09:00:00Z")
        recommend_next(session, ts="2025-03-02T09:00:01Z")
        add_evidence(session, "Male", "t", ts="2025-03-02T09:00:02Z")
        recommend_next(session, ts="2025-03-02T09:00:03Z")
        advance(session, "e-meddec-asa", ts="2025-03-02T09:00:04Z")

        text = dumps_events(session.events)
        replayed = replay_session(loads_events(text), weighted_graph, bn=demo_bn)
        assert replayed.state_doc() == session.state_doc()
        assert dumps_events(replayed.events) == text
        original = [s.to_doc() for s in recommend_next(session, log_event=False)]
        again = [s.to_doc() for s in recommend_next(replayed, log_event=False)]
        assert original == again

    def test_replayed_recompute_payload_matches_fresh_ranking(self, weighted_graph, demo_bn):
        session = start_session("s", weighted_graph, "n-meddec", bn=demo_bn,
                                graph_id="g", bn_id="b", ts="2025-03-02T09:10:00Z")
        add_evidence(session, "Male", "t", ts="2025-03-02T09:10:01Z")
        steps = recommend_next(session, ts="2025-03-02T09:10:02Z")
        replayed = replay_session(loads_events(dumps_events(session.events)), weighted_graph, bn=demo_bn)
        logged = [e for e in replayed.events if e.kind == "recomputed"][-1]
        fresh = recommend_next(replayed, log_event=False)
        assert logged.payload["steps"] == [
            {"edge_id": s.edge_id, "effective_weight": s.effective_weight, "rank": s.rank} for s in fresh
        ]
        assert [s.to_doc() for s in fresh] == [s.to_doc() for s in steps]
