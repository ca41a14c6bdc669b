import pytest

from kgfuse import demo
from kgfuse.bayes import BayesianNetwork, CPT, Variable
from kgfuse.graph import SourceMeta

TS = "2025-03-01T12:00:00Z"


def meta(source_id: str = "test-source", kind: str = "manual", ts: str = TS) -> SourceMeta:
    return SourceMeta(source_id=source_id, source_kind=kind, ingested_at=ts)


@pytest.fixture
def main_graph():
    return demo.build_main_graph()


@pytest.fixture
def infused_graph():
    return demo.build_infused_graph()


@pytest.fixture
def demo_bn():
    return demo.build_demo_bn()


@pytest.fixture
def demo_bindings():
    return demo.build_demo_bindings()


@pytest.fixture
def weighted_graph():
    return demo.build_weighted_graph()


@pytest.fixture
def pair_bn():
    """Minimal two-variable network with the worked conditional: the
    medication as root (0.5 prior) and P(Male=t | ASA=t) = 0.7."""
    return BayesianNetwork(
        domain_tag="rescue-operations",
        variables={
            "ASA": Variable("ASA", ("t", "f")),
            "Male": Variable("Male", ("t", "f")),
        },
        cpts={
            "ASA": CPT("ASA", (), ((0.5, 0.5),)),
            "Male": CPT("Male", ("ASA",), ((0.7, 0.3), (0.3, 0.7))),
        },
        source=meta("demo-pair-bn", "bayesian-network"),
    )
