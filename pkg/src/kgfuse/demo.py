"""Synthetic acute-coronary-syndrome demo dataset.

A small rescue-operations pathway graph, a three-variable outcome network,
a binding file, and an external handbook graph that extends the pathway with
extra inquiries. All timestamps are fixed so the generated documents are
byte-stable; the committed files under ``kgfuse/data`` are generated from
these builders and verified against them in the test suite.

The network keeps the demo's quirky literal conditional (a demographic
conditioned on a medication) with symmetric rows, so the same 0.7 appears
both as the table entry P(Male=t | ASA=t) and as the flipped posterior
P(ASA=t | Male=t) used by live session re-ranking.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .bayes import BayesianNetwork, CPT, Variable
from .graph import Edge, KnowledgeGraph, Node, SourceMeta
from .weighting import EdgeBinding

MAIN_TS = "2025-01-10T08:00:00Z"
BN_TS = "2025-01-12T09:30:00Z"
WEIGHT_TS = "2025-01-12T10:00:00Z"
INFUSED_TS = "2025-01-14T14:00:00Z"

DOMAIN = "rescue-operations"
ACS_TAG = "acute-coronary-syndrome"
RESCUE_TAG = "rescue-operation"
STROKE_TAG = "suspected-stroke"

MAIN_SOURCE_ID = "rescue-field-manual-v2"
BN_SOURCE_ID = "acs-history-bn"
INFUSED_SOURCE_ID = "regional-treatment-handbook"


def _main_meta() -> SourceMeta:
    return SourceMeta(source_id=MAIN_SOURCE_ID, source_kind="manual", ingested_at=MAIN_TS)


def build_main_graph() -> KnowledgeGraph:
    """Main treatment-pathway graph: an ACS path plus a small stroke path so
    context extraction has something to exclude."""
    g = KnowledgeGraph(
        domain_tag=DOMAIN,
        metadata={"source_id": MAIN_SOURCE_ID, "title": "Demo rescue treatment pathways"},
    )
    acs = {ACS_TAG, RESCUE_TAG}
    nodes = [
        Node("n-acs", "Acute coronary syndrome", "situation", _main_meta(), set(acs)),
        Node("n-assess", "Initial assessment", "treatment-step", _main_meta(), set(acs)),
        Node("n-vitals", "Check vital signs", "treatment-step", _main_meta(), set(acs)),
        Node("n-ecg", "12-lead ECG", "inquiry", _main_meta(), set(acs)),
        Node("n-meddec", "Medication decision", "treatment-step", _main_meta(), set(acs)),
        Node("n-asa", "Acetylsalicylic acid", "medication", _main_meta(), set(acs),
             attributes={"dose": "150-300 mg oral"}),
        Node("n-nitro", "Nitroglycerin", "medication", _main_meta(), set(acs)),
        Node("n-transport", "Prepare transport", "treatment-step", _main_meta(), set(acs)),
        Node("n-stroke", "Suspected stroke", "situation", _main_meta(), {STROKE_TAG, RESCUE_TAG}),
        Node("n-fast", "FAST assessment", "treatment-step", _main_meta(), {STROKE_TAG, RESCUE_TAG}),
    ]
    for node in nodes:
        g.add_node(node)
    edges = [
        Edge("e-acs-assess", "n-acs", "n-assess", "starts-with", _main_meta()),
        Edge("e-assess-vitals", "n-assess", "n-vitals", "next-step", _main_meta()),
        Edge("e-vitals-ecg", "n-vitals", "n-ecg", "next-step", _main_meta()),
        Edge("e-ecg-meddec", "n-ecg", "n-meddec", "next-step", _main_meta()),
        Edge("e-meddec-asa", "n-meddec", "n-asa", "recommends", _main_meta()),
        Edge("e-meddec-nitro", "n-meddec", "n-nitro", "recommends", _main_meta()),
        Edge("e-asa-transport", "n-asa", "n-transport", "next-step", _main_meta()),
        Edge("e-nitro-transport", "n-nitro", "n-transport", "next-step", _main_meta()),
        Edge("e-stroke-fast", "n-stroke", "n-fast", "starts-with", _main_meta()),
    ]
    for edge in edges:
        g.add_edge(edge)
    return g


def build_demo_bn() -> BayesianNetwork:
    """ASA -> Male -> Nitro chain over binary variables.

    P(Male=t | ASA=t) = 0.7 with a 0.5 root prior and symmetric rows, so the
    flipped posterior P(ASA=t | Male=t) is 0.7 as well.
    """
    variables = {
        "ASA": Variable("ASA", ("t", "f")),
        "Male": Variable("Male", ("t", "f")),
        "Nitro": Variable("Nitro", ("t", "f")),
    }
    cpts = {
        "ASA": CPT("ASA", (), ((0.5, 0.5),)),
        "Male": CPT("Male", ("ASA",), ((0.7, 0.3), (0.3, 0.7))),
        "Nitro": CPT("Nitro", ("Male",), ((0.4, 0.6), (0.6, 0.4))),
    }
    return BayesianNetwork(
        domain_tag=DOMAIN,
        variables=variables,
        cpts=cpts,
        source=SourceMeta(
            source_id=BN_SOURCE_ID,
            source_kind="bayesian-network",
            ingested_at=BN_TS,
            citation="Synthetic treatment-outcome statistics (demo data)",
        ),
    )


def build_demo_bindings() -> list[EdgeBinding]:
    return [
        EdgeBinding(
            edge_id="e-meddec-asa",
            query_variable="ASA",
            query_state="t",
            evidence={"Male": "t"},
            source_bn_id=BN_SOURCE_ID,
        ),
        EdgeBinding(
            edge_id="e-meddec-nitro",
            query_variable="Nitro",
            query_state="t",
            evidence={},
            source_bn_id=BN_SOURCE_ID,
        ),
    ]


def _infused_meta() -> SourceMeta:
    return SourceMeta(
        source_id=INFUSED_SOURCE_ID,
        source_kind="external-graph",
        ingested_at=INFUSED_TS,
        citation="Regional emergency treatment handbook (demo data)",
    )


def build_infused_graph() -> KnowledgeGraph:
    """External handbook version of the ACS path: same backbone under other
    labels, plus a pain-severity inquiry and an oxygen-saturation measurement
    the main graph lacks."""
    g = KnowledgeGraph(
        domain_tag=DOMAIN,
        metadata={"source_id": INFUSED_SOURCE_ID, "title": "Regional handbook ACS chapter"},
    )
    nodes = [
        Node("m-assess", "Initial Assessment", "treatment-step", _infused_meta(), {ACS_TAG}),
        Node("m-pain", "Pain severity inquiry", "inquiry", _infused_meta(), {ACS_TAG}),
        Node("m-ecg", "ECG (12-lead)", "inquiry", _infused_meta(), {ACS_TAG}),
        Node("m-oxy", "Measure oxygen saturation", "inquiry", _infused_meta(), {ACS_TAG}),
        Node("m-meddec", "Medication Decision", "treatment-step", _infused_meta(), {ACS_TAG}),
        Node("m-asa", "Acetylsalicylic Acid", "medication", _infused_meta(), {ACS_TAG},
             attributes={"dose": "100 mg chewable", "route": "oral"}),
    ]
    for node in nodes:
        g.add_node(node)
    edges = [
        Edge("f-assess-pain", "m-assess", "m-pain", "next-step", _infused_meta()),
        Edge("f-pain-ecg", "m-pain", "m-ecg", "next-step", _infused_meta()),
        Edge("f-ecg-oxy", "m-ecg", "m-oxy", "next-step", _infused_meta()),
        Edge("f-oxy-meddec", "m-oxy", "m-meddec", "next-step", _infused_meta()),
        Edge("f-meddec-asa", "m-meddec", "m-asa", "recommends", _infused_meta()),
    ]
    for edge in edges:
        g.add_edge(edge)
    return g


def build_weighted_graph() -> KnowledgeGraph:
    """Main graph with the demo bindings applied at the fixed timestamp."""
    from .weighting import apply_bindings

    weighted, _ = apply_bindings(build_main_graph(), build_demo_bn(), build_demo_bindings(),
                                 ingested_at=WEIGHT_TS)
    return weighted


def build_golden_fused_graph() -> KnowledgeGraph:
    """Main graph merged with the handbook source at the fixed timestamp."""
    from .merging import align_nodes, merge

    main = build_main_graph()
    infused = build_infused_graph()
    fused, _ = merge(main, infused, align_nodes(main, infused), ingested_at=INFUSED_TS)
    return fused


DATA_FILES = {
    "acs_main.json": build_main_graph,
    "acs_bn.json": build_demo_bn,
    "acs_bindings.json": build_demo_bindings,
    "acs_infused.json": build_infused_graph,
    "acs_weighted.json": build_weighted_graph,
    "golden_fused_acs.json": build_golden_fused_graph,
}


def data_path(name: str) -> Path:
    """Filesystem path of a committed demo data file."""
    if name not in DATA_FILES:
        raise KeyError(f"unknown demo data file {name!r}")
    return Path(str(resources.files("kgfuse").joinpath("data", name)))


def write_data_files(directory: str | Path) -> list[Path]:
    """Regenerate the committed demo files into ``directory``."""
    from .bayes import dumps_bn
    from .graph import dumps_graph
    from .weighting import dumps_bindings

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, builder in DATA_FILES.items():
        value = builder()
        if isinstance(value, KnowledgeGraph):
            text = dumps_graph(value)
        elif isinstance(value, BayesianNetwork):
            text = dumps_bn(value)
        else:
            text = dumps_bindings(value)
        target = directory / name
        target.write_text(text, encoding="utf-8")
        written.append(target)
    return written
