"""Exception hierarchy shared by all kgfuse modules.

Every error carries a stable machine-readable ``code`` so the CLI and the
HTTP service can map failures to exit codes and status codes without string
matching.
"""

from __future__ import annotations

from typing import Any


class KgFuseError(Exception):
    """Base class for all domain errors raised by this package."""

    code = "error"

    def __init__(self, message: str, *, detail: Any = None):
        super().__init__(message)
        self.detail = detail


# ---------------------------------------------------------------------------
# Graph construction and validation
# ---------------------------------------------------------------------------

class DuplicateIdError(KgFuseError):
    code = "duplicate-id"


class DanglingEndpointError(KgFuseError):
    code = "dangling-endpoint"


class SelfLoopError(KgFuseError):
    code = "self-loop"


class InvalidWeightError(KgFuseError):
    code = "invalid-weight"


class CyclicGraphError(KgFuseError):
    """Raised where an acyclic graph is required. ``cycle`` is a witness
    node sequence whose first and last entries coincide."""

    code = "cyclic-graph"

    def __init__(self, message: str, cycle: list[str] | None = None):
        super().__init__(message, detail={"cycle": cycle})
        self.cycle = cycle or []


class FormatError(KgFuseError):
    """A document does not conform to one of the published file formats."""

    code = "format-error"

    def __init__(self, message: str, *, line: int | None = None, path: str | None = None):
        super().__init__(message, detail={"line": line, "path": path})
        self.line = line
        self.path = path


class UnknownNodeError(KgFuseError):
    code = "unknown-node"


class UnknownEdgeError(KgFuseError):
    code = "unknown-edge"


# ---------------------------------------------------------------------------
# Bayesian networks
# ---------------------------------------------------------------------------

class IncompleteAssignmentError(KgFuseError):
    code = "incomplete-assignment"


class UnknownVariableOrStateError(KgFuseError):
    code = "unknown-variable-or-state"


class InvalidQueryError(KgFuseError):
    code = "invalid-query"


class ZeroProbabilityEvidenceError(KgFuseError):
    code = "zero-probability-evidence"


class StateSpaceTooLargeError(KgFuseError):
    code = "state-space-too-large"


class InvalidNetworkError(KgFuseError):
    """The network violates a structural invariant (see its validation report)."""

    code = "invalid-network"


# ---------------------------------------------------------------------------
# Weight fusion (Model A)
# ---------------------------------------------------------------------------

class GateFailedError(KgFuseError):
    """Admission gate rejected the external network; carries the full report."""

    code = "gate-failed"

    def __init__(self, message: str, report: Any = None):
        super().__init__(message, detail=report.to_dict() if report is not None else None)
        self.report = report


class BindingResolutionError(KgFuseError):
    code = "binding-resolution"


class UnweightedEdgeError(KgFuseError):
    code = "unweighted-edge"


# ---------------------------------------------------------------------------
# Merge fusion (Model B)
# ---------------------------------------------------------------------------

class CycleIntroducedError(KgFuseError):
    """Merging the source would close a directed cycle; names the edge."""

    code = "cycle-introduced"

    def __init__(self, message: str, edge_id: str | None = None):
        super().__init__(message, detail={"edge_id": edge_id})
        self.edge_id = edge_id


class UnknownNodeInAlignmentError(KgFuseError):
    code = "unknown-node-in-alignment"


class InvalidAlignmentError(KgFuseError):
    code = "invalid-alignment"


# ---------------------------------------------------------------------------
# Recommendation sessions
# ---------------------------------------------------------------------------

class InvalidPathError(KgFuseError):
    code = "invalid-path"


class SessionNotFoundError(KgFuseError):
    code = "session-not-found"


class NotAnOutgoingEdgeError(KgFuseError):
    code = "not-an-outgoing-edge"


class ContradictoryEvidenceError(KgFuseError):
    code = "contradictory-evidence"


class NoBoundNetworkError(KgFuseError):
    code = "no-bound-network"


# ---------------------------------------------------------------------------
# Gateway
# ---------------------------------------------------------------------------

class ConfigError(KgFuseError):
    code = "config-error"


class UnknownIdError(KgFuseError):
    """A graph, network, or other catalog id does not resolve."""

    code = "unknown-id"
