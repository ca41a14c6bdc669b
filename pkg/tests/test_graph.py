"""Core property-graph contracts: construction, validation, traversal,
canonical persistence."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from kgfuse.errors import (
    CyclicGraphError,
    DanglingEndpointError,
    DuplicateIdError,
    FormatError,
    InvalidWeightError,
    SelfLoopError,
)
from kgfuse.graph import (
    Edge,
    KnowledgeGraph,
    Node,
    dumps_graph,
    extract_context_subgraph,
    load_graph,
    loads_graph,
    register_node_type,
    registered_node_types,
    save_graph,
    topological_order,
    validate_dag,
)

from conftest import meta
from generators import random_dag_graph


def simple_graph(node_ids=("A", "B"), edges=()):
    g = KnowledgeGraph(domain_tag="rescue-operations")
    for nid in node_ids:
        g.add_node(Node(id=nid, label=f"step {nid}", node_type="treatment-step", provenance=meta()))
    for i, (src, tgt) in enumerate(edges):
        g.add_edge(Edge(id=f"e{i}", source=src, target=tgt, relation_type="next-step", provenance=meta()))
    return g


class TestConstruction:
    def test_add_node_base_case(self):
        g = KnowledgeGraph(domain_tag="rescue-operations")
        g.add_node(Node(id="n1", label="step", node_type="treatment-step", provenance=meta()))
        assert len(g.nodes) == 1

    def test_duplicate_node_id(self):
        g = simple_graph()
        with pytest.raises(DuplicateIdError):
            g.add_node(Node(id="A", label="again", node_type="generic", provenance=meta()))

    def test_weighted_edge_with_provenance_accepted(self):
        # 0.7 is the worked demo posterior stamped by the network source.
        g = simple_graph()
        g.add_edge(Edge(id="e", source="A", target="B", relation_type="recommends",
                        provenance=meta(), weight=0.7,
                        weight_provenance=meta("demo-bn", "bayesian-network")))
        assert g.edges["e"].weight == 0.7

    def test_weight_out_of_range(self):
        with pytest.raises(InvalidWeightError):
            Edge(id="e", source="A", target="B", relation_type="r", provenance=meta(),
                 weight=1.3, weight_provenance=meta())

    def test_weight_without_provenance(self):
        with pytest.raises(InvalidWeightError):
            Edge(id="e", source="A", target="B", relation_type="r", provenance=meta(), weight=0.5)

    def test_self_loop_rejected(self):
        with pytest.raises(SelfLoopError):
            Edge(id="e", source="A", target="A", relation_type="r", provenance=meta())

    def test_dangling_endpoint(self):
        g = simple_graph()
        with pytest.raises(DanglingEndpointError):
            g.add_edge(Edge(id="e", source="A", target="Z", relation_type="r", provenance=meta()))

    def test_empty_label_rejected(self):
        with pytest.raises(ValueError):
            Node(id="n", label="  ", node_type="generic", provenance=meta())

    def test_unregistered_node_type_rejected(self):
        with pytest.raises(ValueError):
            Node(id="n", label="x", node_type="nonsense-type", provenance=meta())

    def test_registry_is_extensible(self):
        register_node_type("vital-sign")
        assert "vital-sign" in registered_node_types()
        Node(id="n", label="x", node_type="vital-sign", provenance=meta())

    def test_empty_domain_tag_rejected(self):
        with pytest.raises(ValueError):
            KnowledgeGraph(domain_tag="")


class TestValidateDag:
    def test_single_node(self):
        ok, cycle = validate_dag(simple_graph(node_ids=("A",)))
        assert ok and cycle is None

    def test_canonical_cycle_witness(self):
        g = simple_graph(node_ids=("A", "B", "C"), edges=(("A", "B"), ("B", "C"), ("C", "A")))
        ok, cycle = validate_dag(g)
        assert not ok
        assert cycle == ["A", "B", "C", "A"]

    def test_random_dag_generator_agrees(self):
        rng = random.Random(7)
        for _ in range(50):
            g = random_dag_graph(rng)
            ok, cycle = validate_dag(g)
            assert ok, f"generator produced order-respecting edges, got cycle {cycle}"


class TestTopologicalOrder:
    def test_chain(self):
        g = simple_graph(node_ids=("A", "B", "C"), edges=(("A", "B"), ("B", "C")))
        assert topological_order(g) == ["A", "B", "C"]

    def test_diamond_tie_break(self):
        g = simple_graph(node_ids=("A", "B", "C", "D"),
                         edges=(("A", "B"), ("A", "C"), ("B", "D"), ("C", "D")))
        order = topological_order(g)
        assert order == ["A", "B", "C", "D"]
        positions = {nid: i for i, nid in enumerate(order)}
        for edge in g.edges.values():
            assert positions[edge.source] < positions[edge.target]

    def test_cyclic_raises(self):
        g = simple_graph(node_ids=("A", "B"), edges=(("A", "B"), ("B", "A")))
        with pytest.raises(CyclicGraphError):
            topological_order(g)

    def test_permutation_and_edge_respect(self):
        rng = random.Random(11)
        for _ in range(30):
            g = random_dag_graph(rng)
            order = topological_order(g)
            assert sorted(order) == sorted(g.nodes)
            positions = {nid: i for i, nid in enumerate(order)}
            for edge in g.edges.values():
                assert positions[edge.source] < positions[edge.target]


class TestContextSubgraph:
    def test_acs_context_selects_the_acs_path(self, main_graph):
        sub = extract_context_subgraph(main_graph, {"acute-coronary-syndrome"})
        assert sorted(sub.nodes) == [
            "n-acs", "n-asa", "n-assess", "n-ecg", "n-meddec",
            "n-nitro", "n-transport", "n-vitals",
        ]
        assert "n-stroke" not in sub.nodes
        assert "e-stroke-fast" not in sub.edges

    def test_unused_tag_gives_empty_graph(self, main_graph):
        sub = extract_context_subgraph(main_graph, {"dentistry"})
        assert not sub.nodes and not sub.edges

    def test_all_tags_is_identity(self, main_graph):
        sub = extract_context_subgraph(main_graph, main_graph.all_context_tags())
        assert sub == main_graph

    def test_provenance_preserved_verbatim(self, main_graph):
        sub = extract_context_subgraph(main_graph, {"acute-coronary-syndrome"})
        for nid, node in sub.nodes.items():
            assert node.provenance == main_graph.nodes[nid].provenance


class TestPersistence:
    def test_round_trip_graph_equal(self, main_graph, tmp_path):
        path = tmp_path / "g.json"
        save_graph(main_graph, path)
        assert load_graph(path) == main_graph

    def test_canonical_round_trip_byte_identical(self, main_graph, tmp_path):
        path = tmp_path / "g.json"
        save_graph(main_graph, path)
        first = path.read_bytes()
        save_graph(load_graph(path), path)
        assert path.read_bytes() == first

    def test_malformed_json_names_line(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{\n  "domain_tag": "x",\n  broken\n}', encoding="utf-8")
        with pytest.raises(FormatError) as exc:
            load_graph(path)
        assert exc.value.line == 3

    def test_unknown_key_rejected(self, main_graph):
        doc = main_graph.to_doc()
        doc["surprise"] = 1
        with pytest.raises(FormatError):
            KnowledgeGraph.from_doc(doc)

    def test_cyclic_file_rejected_without_flag(self):
        g = simple_graph(node_ids=("A", "B"), edges=(("A", "B"),))
        g.add_edge(Edge(id="back", source="B", target="A", relation_type="r", provenance=meta()))
        text = dumps_graph(g)
        with pytest.raises(CyclicGraphError):
            loads_graph(text)
        assert loads_graph(text, allow_cycles=True) == g

    def test_random_graph_round_trip(self):
        rng = random.Random(23)
        for _ in range(25):
            g = random_dag_graph(rng, weight_prob=0.4)
            assert loads_graph(dumps_graph(g)) == g


@st.composite
def op_sequences(draw):
    """Sequences of add-node/add-edge operations over a small id space."""
    ops = draw(st.lists(
        st.tuples(st.sampled_from(["node", "edge"]), st.integers(0, 7), st.integers(0, 7)),
        max_size=30,
    ))
    return ops


class TestReferentialIntegrity:
    @given(op_sequences())
    @settings(max_examples=100, deadline=None)
    def test_endpoints_always_resolve(self, ops):
        g = KnowledgeGraph(domain_tag="rescue-operations")
        edge_n = 0
        for kind, a, b in ops:
            if kind == "node":
                try:
                    g.add_node(Node(id=f"n{a}", label=f"step {a}", node_type="generic", provenance=meta()))
                except DuplicateIdError:
                    pass
            else:
                try:
                    g.add_edge(Edge(id=f"e{edge_n}", source=f"n{a}", target=f"n{b}",
                                    relation_type="r", provenance=meta()))
                    edge_n += 1
                except (DanglingEndpointError, SelfLoopError, DuplicateIdError):
                    pass
            for edge in g.edges.values():
                assert edge.source in g.nodes and edge.target in g.nodes

    def test_weight_domain_invariant(self):
        rng = random.Random(3)
        for _ in range(20):
            g = random_dag_graph(rng, weight_prob=0.5)
            for edge in g.edges.values():
                if edge.weight is not None:
                    assert 0.0 <= edge.weight <= 1.0
                    assert edge.weight_provenance is not None
