"""kgfuse: treatment-pathway knowledge graph fusion and recommendation.

Fuses external knowledge into a main treatment-pathway graph two ways:
binding Bayesian-network posteriors onto edges as decision weights, and
contextually merging external treatment graphs. On top of the fused graph it
ranks next treatment steps for an operator walking a live session.
"""

from .bayes import (
    BayesianNetwork,
    CPT,
    JointTable,
    Variable,
    enumerate_joint,
    infer_posterior,
    is_markov_independent,
    joint_probability,
    load_bn,
    save_bn,
    validate_bn,
)
from .errors import KgFuseError
from .graph import (
    Edge,
    KnowledgeGraph,
    Node,
    SourceMeta,
    extract_context_subgraph,
    load_graph,
    register_node_type,
    save_graph,
    topological_order,
    validate_dag,
)
from .merging import AlignmentConfig, FusionReport, NodeAlignment, align_nodes, fuse_many, merge
from .recommend import (
    RankedStep,
    RecommendationSession,
    TreatmentPath,
    add_evidence,
    advance,
    enumerate_paths,
    path_probability,
    recommend_next,
    replay_session,
    start_session,
)
from .weighting import (
    EdgeBinding,
    FusionGateReport,
    apply_bindings,
    check_fusion_gate,
    explain_weight,
    load_bindings,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentConfig",
    "BayesianNetwork",
    "CPT",
    "Edge",
    "EdgeBinding",
    "FusionGateReport",
    "FusionReport",
    "JointTable",
    "KgFuseError",
    "KnowledgeGraph",
    "Node",
    "NodeAlignment",
    "RankedStep",
    "RecommendationSession",
    "SourceMeta",
    "TreatmentPath",
    "Variable",
    "add_evidence",
    "advance",
    "align_nodes",
    "apply_bindings",
    "check_fusion_gate",
    "enumerate_joint",
    "enumerate_paths",
    "explain_weight",
    "extract_context_subgraph",
    "fuse_many",
    "infer_posterior",
    "is_markov_independent",
    "joint_probability",
    "load_bindings",
    "load_bn",
    "load_graph",
    "merge",
    "path_probability",
    "recommend_next",
    "register_node_type",
    "replay_session",
    "save_bn",
    "save_graph",
    "start_session",
    "topological_order",
    "validate_bn",
    "validate_dag",
]
