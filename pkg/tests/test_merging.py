"""Model B: contextual alignment, merging, the committed golden scenario,
and the fold over many sources."""

import random

import pytest

from kgfuse import demo
from kgfuse.errors import CycleIntroducedError, InvalidAlignmentError, UnknownNodeInAlignmentError
from kgfuse.graph import Edge, KnowledgeGraph, Node, load_graph, validate_dag
from kgfuse.merging import (
    AlignedPair,
    AlignmentConfig,
    NodeAlignment,
    align_nodes,
    fuse_many,
    label_similarity,
    levenshtein,
    merge,
    normalize_label,
)

from conftest import meta
from generators import random_dag_graph


def tagged_graph(shape, domain="rescue-operations", source_id="test-src"):
    """shape: {node_id: (label, node_type, tags)} plus optional edge list."""
    nodes, edges = shape
    g = KnowledgeGraph(domain_tag=domain, metadata={"source_id": source_id})
    for nid, (label, node_type, tags) in nodes.items():
        g.add_node(Node(id=nid, label=label, node_type=node_type, provenance=meta(source_id),
                        context_tags=set(tags)))
    for i, (src, tgt) in enumerate(edges):
        g.add_edge(Edge(id=f"e-{src}-{tgt}", source=src, target=tgt, relation_type="next-step",
                        provenance=meta(source_id)))
    return g


class TestSimilarity:
    def test_levenshtein_basics(self):
        assert levenshtein("", "") == 0
        assert levenshtein("abc", "") == 3
        assert levenshtein("kitten", "sitting") == 3

    def test_normalization_strips_case_punctuation_order(self):
        assert normalize_label("12-lead ECG") == normalize_label("ECG (12-lead)") == "12 ecg lead"

    def test_worked_alignment_pair_clears_threshold(self):
        similarity = label_similarity("12-lead ECG", "ECG (12-lead)")
        assert similarity == 1.0
        assert similarity >= AlignmentConfig().label_similarity_threshold

    def test_unrelated_labels_score_low(self):
        assert label_similarity("Initial assessment", "Nitroglycerin") < 0.5


class TestAlignNodes:
    def test_identical_graphs_self_align_everywhere(self, main_graph):
        alignment = align_nodes(main_graph, main_graph)
        assert len(alignment.pairs) == len(main_graph.nodes)
        assert all(p.main_id == p.infused_id and p.similarity == 1.0 for p in alignment.pairs)
        assert alignment.unmatched_infused == []

    def test_demo_ecg_nodes_align(self, main_graph, infused_graph):
        alignment = align_nodes(main_graph, infused_graph)
        pairs = {p.infused_id: p.main_id for p in alignment.pairs}
        assert pairs["m-ecg"] == "n-ecg"
        ecg_pair = next(p for p in alignment.pairs if p.infused_id == "m-ecg")
        assert "acute-coronary-syndrome" in ecg_pair.matched_tags

    def test_disjoint_context_tags_block_alignment(self):
        main = tagged_graph(({"a": ("Checkup", "inquiry", {"ctx-1"})}, []))
        infused = tagged_graph(({"b": ("Checkup", "inquiry", {"ctx-2"})}, []))
        assert align_nodes(main, infused).pairs == []
        relaxed = AlignmentConfig(require_context_overlap=False)
        assert len(align_nodes(main, infused, relaxed).pairs) == 1

    def test_node_type_mismatch_blocks_alignment(self):
        main = tagged_graph(({"a": ("Checkup", "inquiry", {"ctx"})}, []))
        infused = tagged_graph(({"b": ("Checkup", "medication", {"ctx"})}, []))
        assert align_nodes(main, infused).pairs == []
        relaxed = AlignmentConfig(require_same_node_type=False)
        assert len(align_nodes(main, infused, relaxed).pairs) == 1

    def test_injectivity_under_ambiguity(self):
        main = tagged_graph(({"a1": ("Blood pressure", "inquiry", {"ctx"})}, []))
        infused = tagged_graph(({
            "b1": ("Blood pressure", "inquiry", {"ctx"}),
            "b2": ("blood pressure", "inquiry", {"ctx"}),
        }, []))
        alignment = align_nodes(main, infused)
        assert len(alignment.pairs) == 1
        # deterministic tie-break: both score 1.0, so the smaller infused id wins
        assert alignment.pairs[0].infused_id == "b1"
        assert alignment.unmatched_infused == ["b2"]


class TestMerge:
    def test_self_merge_adds_nothing(self, main_graph):
        fused, report = merge(main_graph, main_graph, align_nodes(main_graph, main_graph))
        assert fused == main_graph
        assert report.added_nodes == [] and report.added_edges == []
        assert report.aligned_pair_count == len(main_graph.nodes)

    def test_golden_scenario_matches_committed_file(self, main_graph, infused_graph):
        fused, report = merge(main_graph, infused_graph, align_nodes(main_graph, infused_graph),
                              ingested_at=demo.INFUSED_TS)
        golden = load_graph(demo.data_path("golden_fused_acs.json"))
        assert fused == golden
        assert report.added_nodes == ["m-oxy", "m-pain"]
        assert report.added_edges == ["f-assess-pain", "f-ecg-oxy", "f-oxy-meddec", "f-pain-ecg"]
        assert report.skipped_duplicates == ["f-meddec-asa"]

    def test_main_graph_is_subgraph_of_fused(self, main_graph, infused_graph):
        fused, _ = merge(main_graph, infused_graph, align_nodes(main_graph, infused_graph))
        for nid, node in main_graph.nodes.items():
            kept = fused.nodes[nid]
            assert kept.label == node.label and kept.node_type == node.node_type
            for key, value in node.attributes.items():
                assert kept.attributes[key] == value
            assert node.context_tags <= kept.context_tags
        for eid, edge in main_graph.edges.items():
            assert fused.edges[eid] == edge

    def test_attribute_conflict_recorded_main_wins(self, main_graph, infused_graph):
        fused, report = merge(main_graph, infused_graph, align_nodes(main_graph, infused_graph))
        [conflict] = report.conflicts
        assert (conflict.main_id, conflict.key) == ("n-asa", "dose")
        assert fused.nodes["n-asa"].attributes["dose"] == "150-300 mg oral"
        assert fused.nodes["n-asa"].attributes["route"] == "oral"  # adopted, absent from main

    def test_added_elements_keep_source_provenance(self, main_graph, infused_graph):
        fused, report = merge(main_graph, infused_graph, align_nodes(main_graph, infused_graph))
        for nid in report.added_nodes:
            assert fused.nodes[nid].provenance.source_id == demo.INFUSED_SOURCE_ID
        for eid in report.added_edges:
            assert fused.edges[eid].provenance.source_id == demo.INFUSED_SOURCE_ID

    def test_cycle_introducing_edge_rejected_atomically(self, main_graph):
        back = tagged_graph((
            {
                "x-meddec": ("Medication decision", "treatment-step", {"acute-coronary-syndrome"}),
                "x-assess": ("Initial assessment", "treatment-step", {"acute-coronary-syndrome"}),
            },
            [("x-meddec", "x-assess")],
        ))
        alignment = align_nodes(main_graph, back)
        assert len(alignment.pairs) == 2
        with pytest.raises(CycleIntroducedError) as exc:
            merge(main_graph, back, alignment)
        assert exc.value.edge_id == "e-x-meddec-x-assess"

    def test_merge_never_mutates_inputs(self, main_graph, infused_graph):
        before_main = main_graph.to_doc()
        before_infused = infused_graph.to_doc()
        merge(main_graph, infused_graph, align_nodes(main_graph, infused_graph))
        assert main_graph.to_doc() == before_main
        assert infused_graph.to_doc() == before_infused

    def test_idempotence(self, main_graph, infused_graph):
        fused, _ = merge(main_graph, infused_graph, align_nodes(main_graph, infused_graph))
        again, report = merge(fused, infused_graph, align_nodes(fused, infused_graph))
        assert again == fused
        assert report.added_nodes == [] and report.added_edges == []

    def test_unknown_node_in_alignment(self, main_graph, infused_graph):
        alignment = NodeAlignment(pairs=[AlignedPair("ghost", "m-ecg", 1.0, [])], unmatched_infused=[])
        with pytest.raises(UnknownNodeInAlignmentError):
            merge(main_graph, infused_graph, alignment)

    def test_non_injective_alignment_rejected(self, main_graph, infused_graph):
        alignment = NodeAlignment(
            pairs=[AlignedPair("n-ecg", "m-ecg", 1.0, []), AlignedPair("n-ecg", "m-assess", 1.0, [])],
            unmatched_infused=[],
        )
        with pytest.raises(InvalidAlignmentError):
            merge(main_graph, infused_graph, alignment)

    def test_colliding_ids_are_renamed(self):
        main = tagged_graph(({"a": ("Alpha step", "treatment-step", {"ctx"})}, []))
        infused = tagged_graph(({"a": ("Totally different", "inquiry", {"ctx"})}, []),
                               source_id="other")
        fused, report = merge(main, infused, align_nodes(main, infused))
        assert report.added_nodes == ["a~2"]
        assert fused.nodes["a"].label == "Alpha step"
        assert fused.nodes["a~2"].label == "Totally different"


class TestFuseMany:
    def test_zero_sources_is_identity(self, main_graph):
        fused, reports = fuse_many(main_graph, [])
        assert fused == main_graph and reports == []

    def test_single_source_equals_align_plus_merge(self, main_graph, infused_graph):
        direct, direct_report = merge(main_graph, infused_graph,
                                      align_nodes(main_graph, infused_graph),
                                      ingested_at=demo.INFUSED_TS)
        folded, reports = fuse_many(main_graph, [infused_graph], ingested_at=demo.INFUSED_TS)
        assert folded == direct
        assert reports[0].to_dict() == direct_report.to_dict()

    def test_disjoint_sources_commute(self, main_graph):
        src_a = tagged_graph(({
            "p1": ("Oxygen therapy", "treatment-step", {"ctx-alpha"}),
            "p2": ("Reassess airway", "inquiry", {"ctx-alpha"}),
        }, [("p1", "p2")]), source_id="src-a")
        src_b = tagged_graph(({
            "q1": ("Immobilize limb", "treatment-step", {"ctx-beta"}),
        }, []), source_id="src-b")
        ab, _ = fuse_many(main_graph, [src_a, src_b], ingested_at=demo.INFUSED_TS)
        ba, _ = fuse_many(main_graph, [src_b, src_a], ingested_at=demo.INFUSED_TS)
        assert ab == ba

    def test_failing_source_skipped_later_sources_applied(self, main_graph, infused_graph):
        back = tagged_graph((
            {
                "x-meddec": ("Medication decision", "treatment-step", {"acute-coronary-syndrome"}),
                "x-assess": ("Initial assessment", "treatment-step", {"acute-coronary-syndrome"}),
            },
            [("x-meddec", "x-assess")],
        ), source_id="bad-src")
        fused, reports = fuse_many(main_graph, [back, infused_graph], ingested_at=demo.INFUSED_TS)
        assert [r.status for r in reports] == ["skipped", "applied"]
        assert "cycle" in reports[0].error
        golden = load_graph(demo.data_path("golden_fused_acs.json"))
        assert fused == golden


class TestMergeProperties:
    def test_random_pairs_preserve_main_and_stay_acyclic(self):
        rng = random.Random(53)
        merged = 0
        for _ in range(60):
            main = random_dag_graph(rng, max_nodes=8, id_prefix="a")
            infused = random_dag_graph(rng, max_nodes=8, id_prefix="b")
            alignment = align_nodes(main, infused)
            infused_ids = {p.infused_id for p in alignment.pairs}
            main_ids = [p.main_id for p in alignment.pairs]
            assert len(infused_ids) == len(alignment.pairs)
            assert len(set(main_ids)) == len(alignment.pairs)
            try:
                fused, report = merge(main, infused, alignment)
            except CycleIntroducedError:
                continue
            merged += 1
            for nid in main.nodes:
                assert nid in fused.nodes
            for eid, edge in main.edges.items():
                assert fused.edges[eid].to_doc() == edge.to_doc()
            ok, _ = validate_dag(fused)
            assert ok
            for nid in report.added_nodes:
                assert nid in fused.nodes
            for eid in report.added_edges:
                assert eid in fused.edges
        assert merged > 10
