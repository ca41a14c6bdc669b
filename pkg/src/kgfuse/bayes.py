"""Discrete Bayesian networks with exact posterior inference.

A network is a DAG of discrete variables, one conditional probability table
per variable. The joint distribution factorizes into the parent-conditioned
local distributions, so any full assignment's probability is the product of
one CPT entry per variable.

Posteriors are computed by variable elimination:

    1. start from one factor per CPT, sliced down by the evidence,
    2. repeatedly pick the next hidden variable (min-degree heuristic unless
       an explicit order is given), multiply all factors mentioning it, and
       sum it out,
    3. multiply the survivors and normalize over the query variable.

Networks small enough for clinical decision weights never stress this; an
exhaustive joint enumeration is provided as an independent oracle for tests.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    FormatError,
    IncompleteAssignmentError,
    InvalidNetworkError,
    InvalidQueryError,
    StateSpaceTooLargeError,
    UnknownVariableOrStateError,
    ZeroProbabilityEvidenceError,
)
from .graph import SourceMeta, _obj, _require_keys, _text, _text_list, canonical_json

ROW_SUM_TOLERANCE = 1e-9
POSTERIOR_TOLERANCE = 1e-9
DEFAULT_STATE_SPACE_CAP = 2 ** 20


@dataclass
class Variable:
    name: str
    states: tuple[str, ...]

    def __post_init__(self):
        if not self.name or not self.name.strip():
            raise ValueError("variable name must be nonempty")
        self.states = tuple(self.states)
        if len(self.states) < 2:
            raise ValueError(f"variable {self.name!r}: needs at least two states")
        if len(set(self.states)) != len(self.states):
            raise ValueError(f"variable {self.name!r}: state names must be unique")


@dataclass
class CPT:
    """Conditional distribution of ``child`` for every combination of parent
    states. Rows are ordered like ``itertools.product`` over the parents'
    declared state lists (first parent varies slowest)."""

    child: str
    parents: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        self.parents = tuple(self.parents)
        self.rows = tuple(tuple(float(x) for x in row) for row in self.rows)


@dataclass
class BayesianNetwork:
    """Immutable-after-validation network. ``variables`` preserves declaration
    order, which fixes CPT row order and the joint-enumeration row order."""

    domain_tag: str
    variables: dict[str, Variable]
    cpts: dict[str, CPT]
    source: SourceMeta | None = None
    _checked: bool = field(default=False, repr=False, compare=False)

    def states_of(self, name: str) -> tuple[str, ...]:
        var = self.variables.get(name)
        if var is None:
            raise UnknownVariableOrStateError(f"unknown variable {name!r}")
        return var.states

    def state_index(self, name: str, state: str) -> int:
        states = self.states_of(name)
        try:
            return states.index(state)
        except ValueError:
            raise UnknownVariableOrStateError(f"variable {name!r} has no state {state!r}") from None

    def to_doc(self) -> dict:
        doc = {
            "domain_tag": self.domain_tag,
            "variables": [{"name": v.name, "states": list(v.states)} for v in self.variables.values()],
            "cpts": [
                {"child": c.child, "parents": list(c.parents), "rows": [list(r) for r in c.rows]}
                for c in (self.cpts[name] for name in self.variables if name in self.cpts)
            ],
        }
        # CPTs whose child is not a declared variable still round-trip.
        extra = [c for name, c in self.cpts.items() if name not in self.variables]
        doc["cpts"].extend(
            {"child": c.child, "parents": list(c.parents), "rows": [list(r) for r in c.rows]} for c in extra
        )
        if self.source is not None:
            doc["source"] = self.source.to_doc()
        return doc

    @classmethod
    def from_doc(cls, doc: dict) -> "BayesianNetwork":
        if not isinstance(doc, dict):
            raise FormatError("network document must be a JSON object")
        _require_keys(doc, {"domain_tag", "variables", "cpts"}, {"source"}, "network")
        domain_tag = _text(doc, "domain_tag", "network")
        if not domain_tag.strip():
            raise FormatError("network.domain_tag must be nonempty", path="network")
        variables: dict[str, Variable] = {}
        if not isinstance(doc["variables"], list):
            raise FormatError("network.variables must be an array", path="network")
        for i, var_doc in enumerate(doc["variables"]):
            path = f"variables[{i}]"
            if not isinstance(var_doc, dict):
                raise FormatError(f"{path} must be an object", path=path)
            _require_keys(var_doc, {"name", "states"}, set(), path)
            try:
                var = Variable(name=_text(var_doc, "name", path), states=tuple(_text_list(var_doc, "states", path)))
            except ValueError as exc:
                raise FormatError(str(exc), path=path) from None
            if var.name in variables:
                raise FormatError(f"{path}: duplicate variable {var.name!r}", path=path)
            variables[var.name] = var
        cpts: dict[str, CPT] = {}
        if not isinstance(doc["cpts"], list):
            raise FormatError("network.cpts must be an array", path="network")
        for i, cpt_doc in enumerate(doc["cpts"]):
            path = f"cpts[{i}]"
            if not isinstance(cpt_doc, dict):
                raise FormatError(f"{path} must be an object", path=path)
            _require_keys(cpt_doc, {"child", "parents", "rows"}, set(), path)
            child = _text(cpt_doc, "child", path)
            rows = cpt_doc["rows"]
            if not isinstance(rows, list) or not all(
                isinstance(row, list) and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in row)
                for row in rows
            ):
                raise FormatError(f"{path}.rows must be an array of number arrays", path=path)
            if child in cpts:
                raise FormatError(f"{path}: duplicate CPT for {child!r}", path=path)
            cpts[child] = CPT(
                child=child,
                parents=tuple(_text_list(cpt_doc, "parents", path)),
                rows=tuple(tuple(row) for row in rows),
            )
        source = None
        if "source" in doc:
            source = SourceMeta.from_doc(_obj(doc, "source", "network"), "network.source")
        return cls(domain_tag=domain_tag, variables=variables, cpts=cpts, source=source)


def dumps_bn(bn: BayesianNetwork) -> str:
    return canonical_json(bn.to_doc())


def loads_bn(text: str) -> BayesianNetwork:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg} (line {exc.lineno})", line=exc.lineno) from None
    return BayesianNetwork.from_doc(doc)


def save_bn(bn: BayesianNetwork, path: str | Path) -> None:
    Path(path).write_text(dumps_bn(bn), encoding="utf-8")


def load_bn(path: str | Path) -> BayesianNetwork:
    return loads_bn(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass
class BnViolation:
    kind: str  # cycle | mutual-parents | dangling-parent | missing-cpt | row-count | row-sum | entry-range
    message: str
    detail: dict | None = None

    def to_doc(self) -> dict:
        return {"kind": self.kind, "message": self.message, "detail": self.detail or {}}


@dataclass
class BnValidationReport:
    valid: bool
    violations: list[BnViolation]

    def by_kind(self, kind: str) -> list[BnViolation]:
        return [v for v in self.violations if v.kind == kind]

    def to_dict(self) -> dict:
        return {"valid": self.valid, "violations": [v.to_doc() for v in self.violations]}


def validate_bn(bn: BayesianNetwork, *, row_sum_tolerance: float = ROW_SUM_TOLERANCE) -> BnValidationReport:
    """Structural and numerical validation.

    Directionality violations are reported separately from acyclicity ones:
    a mutual parent pair (A lists B and B lists A) means the modeler left an
    edge without a determinate direction and is flagged ``mutual-parents``;
    any other directed cycle is flagged ``cycle`` with a witness.
    """
    violations: list[BnViolation] = []

    for name in bn.variables:
        if name not in bn.cpts:
            violations.append(BnViolation("missing-cpt", f"variable {name!r} has no CPT"))
    for child in bn.cpts:
        if child not in bn.variables:
            violations.append(BnViolation("missing-cpt", f"CPT child {child!r} is not a declared variable"))

    parents_of: dict[str, tuple[str, ...]] = {}
    for child, cpt in bn.cpts.items():
        if child not in bn.variables:
            continue
        resolved = []
        for parent in cpt.parents:
            if parent not in bn.variables:
                violations.append(
                    BnViolation("dangling-parent", f"CPT for {child!r} references unknown parent {parent!r}",
                                {"child": child, "parent": parent})
                )
            else:
                resolved.append(parent)
        parents_of[child] = tuple(resolved)

    # Mutual parent pairs: undirected in spirit, reported as directionality.
    mutual_pairs: set[frozenset[str]] = set()
    for child, parents in parents_of.items():
        for parent in parents:
            if child in parents_of.get(parent, ()):
                mutual_pairs.add(frozenset((child, parent)))
    for pair in sorted(mutual_pairs, key=sorted):
        a, b = sorted(pair)
        violations.append(
            BnViolation("mutual-parents", f"variables {a!r} and {b!r} list each other as parents",
                        {"pair": [a, b]})
        )

    cycle = _find_cycle(parents_of, skip_pairs=mutual_pairs)
    if cycle is not None:
        violations.append(
            BnViolation("cycle", f"parent relation contains a cycle: {' -> '.join(cycle)}", {"cycle": cycle})
        )

    for child, cpt in bn.cpts.items():
        if child not in bn.variables:
            continue
        if any(p not in bn.variables for p in cpt.parents):
            continue  # row geometry is meaningless with dangling parents
        expected_rows = math.prod(len(bn.variables[p].states) for p in cpt.parents)
        if len(cpt.rows) != expected_rows:
            violations.append(
                BnViolation("row-count",
                            f"CPT for {child!r} has {len(cpt.rows)} rows, expected {expected_rows}",
                            {"child": child}))
            continue
        width = len(bn.variables[child].states)
        for r, row in enumerate(cpt.rows):
            if len(row) != width:
                violations.append(
                    BnViolation("row-count", f"CPT for {child!r} row {r} has {len(row)} entries, expected {width}",
                                {"child": child, "row": r}))
                continue
            if any(not 0.0 <= x <= 1.0 for x in row):
                violations.append(
                    BnViolation("entry-range", f"CPT for {child!r} row {r} has entries outside [0, 1]",
                                {"child": child, "row": r}))
            total = sum(row)
            if abs(total - 1.0) > row_sum_tolerance:
                violations.append(
                    BnViolation("row-sum", f"CPT for {child!r} row {r} sums to {total!r}, expected 1.0",
                                {"child": child, "row": r, "sum": total}))

    return BnValidationReport(valid=not violations, violations=violations)


def _find_cycle(parents_of: dict[str, tuple[str, ...]],
                skip_pairs: set[frozenset[str]] | None = None) -> list[str] | None:
    """Cycle witness over the parent->child relation, ignoring edges inside
    ``skip_pairs`` (those are already reported as directionality errors)."""
    skip = skip_pairs or set()
    children: dict[str, list[str]] = {v: [] for v in parents_of}
    for child, parents in parents_of.items():
        for parent in parents:
            if parent in children and frozenset((parent, child)) not in skip:
                children[parent].append(child)
    for targets in children.values():
        targets.sort()

    WHITE, GRAY, BLACK = 0, 1, 2
    color = {v: WHITE for v in children}
    for start in sorted(children):
        if color[start] != WHITE:
            continue
        path = [start]
        stack = [(start, 0)]
        color[start] = GRAY
        while stack:
            node, idx = stack[-1]
            targets = children[node]
            if idx < len(targets):
                stack[-1] = (node, idx + 1)
                nxt = targets[idx]
                if color[nxt] == GRAY:
                    return path[path.index(nxt):] + [nxt]
                if color[nxt] == WHITE:
                    color[nxt] = GRAY
                    path.append(nxt)
                    stack.append((nxt, 0))
            else:
                color[node] = BLACK
                path.pop()
                stack.pop()
    return None


def _require_valid(bn: BayesianNetwork) -> None:
    if bn._checked:
        return
    report = validate_bn(bn)
    if not report.valid:
        raise InvalidNetworkError(
            "network fails validation: " + "; ".join(v.message for v in report.violations),
            detail=report.to_dict(),
        )
    bn._checked = True


# ---------------------------------------------------------------------------
# Joint probability and enumeration
# ---------------------------------------------------------------------------

def _check_assignment(bn: BayesianNetwork, assignment: dict[str, str], *, full: bool) -> None:
    for var, state in assignment.items():
        bn.state_index(var, state)  # raises UnknownVariableOrState
    if full:
        missing = bn.variables.keys() - assignment.keys()
        if missing:
            raise IncompleteAssignmentError(f"assignment missing variable(s) {sorted(missing)}")


def joint_probability(bn: BayesianNetwork, assignment: dict[str, str]) -> float:
    """Chain-rule product of one CPT entry per variable; requires a full
    assignment."""
    _require_valid(bn)
    _check_assignment(bn, assignment, full=True)
    result = 1.0
    for name, cpt in bn.cpts.items():
        row = _row_index(bn, cpt, assignment)
        col = bn.state_index(name, assignment[name])
        result *= cpt.rows[row][col]
    return result


def _row_index(bn: BayesianNetwork, cpt: CPT, assignment: dict[str, str]) -> int:
    row = 0
    for parent in cpt.parents:
        row = row * len(bn.variables[parent].states) + bn.state_index(parent, assignment[parent])
    return row


@dataclass
class JointTable:
    """Exhaustive joint distribution: one row per full assignment, ordered by
    ``itertools.product`` over the declared variable/state order."""

    variables: list[str]
    rows: list[tuple[tuple[str, ...], float]]

    def total(self) -> float:
        return sum(p for _, p in self.rows)

    def as_assignments(self) -> list[tuple[dict[str, str], float]]:
        return [(dict(zip(self.variables, states)), p) for states, p in self.rows]


def enumerate_joint(bn: BayesianNetwork, *, cap: int = DEFAULT_STATE_SPACE_CAP) -> JointTable:
    """Brute-force enumeration of the full joint distribution.

    Kept deliberately independent of the variable-elimination path so the two
    can serve as mutual oracles in tests.
    """
    _require_valid(bn)
    names = list(bn.variables)
    size = math.prod(len(bn.variables[n].states) for n in names) if names else 1
    if size > cap:
        raise StateSpaceTooLargeError(f"joint table would have {size} rows (cap {cap})")
    state_lists = [bn.variables[n].states for n in names]
    rows: list[tuple[tuple[str, ...], float]] = []
    for combo in itertools.product(*state_lists):
        position = dict(zip(names, combo))
        p = 1.0
        for name in names:
            cpt = bn.cpts[name]
            row = 0
            for parent in cpt.parents:
                row = row * len(bn.variables[parent].states) + bn.variables[parent].states.index(position[parent])
            p *= cpt.rows[row][bn.variables[name].states.index(position[name])]
        rows.append((combo, p))
    return JointTable(variables=names, rows=rows)


# ---------------------------------------------------------------------------
# Markov condition
# ---------------------------------------------------------------------------

def descendants(bn: BayesianNetwork, variable: str) -> set[str]:
    """All variables reachable from ``variable`` along parent->child edges
    (the variable itself excluded)."""
    if variable not in bn.variables:
        raise UnknownVariableOrStateError(f"unknown variable {variable!r}")
    children: dict[str, set[str]] = {v: set() for v in bn.variables}
    for child, cpt in bn.cpts.items():
        for parent in cpt.parents:
            if parent in children and child in bn.variables:
                children[parent].add(child)
    seen: set[str] = set()
    frontier = [variable]
    while frontier:
        current = frontier.pop()
        for nxt in children[current]:
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def is_markov_independent(bn: BayesianNetwork, variable: str, others: Iterable[str]) -> bool:
    """Structural Markov-condition check: true iff every member of ``others``
    is a non-descendant of ``variable``. Given its parents, the variable is
    conditionally independent of exactly such sets. A variable counts as a
    descendant of itself here."""
    other_set = set(others)
    for name in other_set:
        if name not in bn.variables:
            raise UnknownVariableOrStateError(f"unknown variable {name!r}")
    desc = descendants(bn, variable)
    return all(name != variable and name not in desc for name in other_set)


# ---------------------------------------------------------------------------
# Variable elimination
# ---------------------------------------------------------------------------

@dataclass
class _Factor:
    vars: tuple[str, ...]
    values: np.ndarray  # shape: one axis per var, in vars order

    def condition(self, var: str, index: int) -> "_Factor":
        axis = self.vars.index(var)
        return _Factor(
            vars=self.vars[:axis] + self.vars[axis + 1:],
            values=np.take(self.values, index, axis=axis),
        )

    def marginalize(self, var: str) -> "_Factor":
        axis = self.vars.index(var)
        return _Factor(vars=self.vars[:axis] + self.vars[axis + 1:], values=self.values.sum(axis=axis))


def _multiply(f: _Factor, g: _Factor, card: dict[str, int]) -> _Factor:
    out_vars = f.vars + tuple(v for v in g.vars if v not in f.vars)
    f_exp = f.values.reshape(f.values.shape + (1,) * (len(out_vars) - len(f.vars)))
    g_axes = [g.vars.index(v) for v in out_vars if v in g.vars]
    g_t = np.transpose(g.values, g_axes) if g.vars else g.values
    g_shape = tuple(card[v] if v in g.vars else 1 for v in out_vars)
    g_exp = g_t.reshape(g_shape)
    return _Factor(vars=out_vars, values=f_exp * g_exp)


def _cpt_factor(bn: BayesianNetwork, name: str) -> _Factor:
    cpt = bn.cpts[name]
    axis_vars = cpt.parents + (name,)
    shape = tuple(len(bn.variables[v].states) for v in axis_vars)
    values = np.array(cpt.rows, dtype=float).reshape(shape)
    return _Factor(vars=axis_vars, values=values)


def _min_degree_order(factor_scopes: list[tuple[str, ...]], hidden: set[str]) -> list[str]:
    neighbors: dict[str, set[str]] = {v: set() for v in hidden}
    for scope in factor_scopes:
        scoped = [v for v in scope if v in hidden]
        for a in scoped:
            for b in scoped:
                if a != b:
                    neighbors[a].add(b)
    remaining = set(hidden)
    order: list[str] = []
    while remaining:
        pick = min(remaining, key=lambda v: (len(neighbors[v] & remaining), v))
        order.append(pick)
        live = neighbors[pick] & remaining
        for a in live:
            neighbors[a] |= live - {a}
        remaining.remove(pick)
    return order


def infer_posterior(
    bn: BayesianNetwork,
    query: str,
    evidence: dict[str, str] | None = None,
    *,
    elimination_order: Sequence[str] | None = None,
) -> dict[str, float]:
    """Exact posterior P(query | evidence) as a state -> probability map.

    The result sums to 1 within 1e-9. ``elimination_order``, when given, must
    be a permutation of the hidden variables; results do not depend on it.
    """
    _require_valid(bn)
    evidence = dict(evidence or {})
    if query not in bn.variables:
        raise UnknownVariableOrStateError(f"unknown variable {query!r}")
    _check_assignment(bn, evidence, full=False)
    if query in evidence:
        raise InvalidQueryError(f"query variable {query!r} appears in the evidence")

    card = {name: len(var.states) for name, var in bn.variables.items()}
    factors: list[_Factor] = []
    for name in bn.variables:
        factor = _cpt_factor(bn, name)
        for var, state in evidence.items():
            if var in factor.vars:
                factor = factor.condition(var, bn.state_index(var, state))
        factors.append(factor)

    hidden = set(bn.variables) - {query} - evidence.keys()
    if elimination_order is None:
        order = _min_degree_order([f.vars for f in factors], hidden)
    else:
        order = list(elimination_order)
        if set(order) != hidden or len(order) != len(hidden):
            raise InvalidQueryError(
                f"elimination order must be a permutation of the hidden variables {sorted(hidden)}"
            )

    for var in order:
        related = [f for f in factors if var in f.vars]
        if not related:
            continue
        product = related[0]
        for f in related[1:]:
            product = _multiply(product, f, card)
        factors = [f for f in factors if var not in f.vars]
        factors.append(product.marginalize(var))

    result = _Factor(vars=(), values=np.array(1.0))
    for f in factors:
        result = _multiply(result, f, card)
    if result.vars != (query,):
        axis = result.vars.index(query)
        result = _Factor(vars=(query,), values=np.moveaxis(result.values, axis, 0).reshape(card[query], -1).sum(axis=1))

    total = float(result.values.sum())
    if total <= 0.0:
        raise ZeroProbabilityEvidenceError(f"evidence {evidence!r} has probability 0")
    normalized = result.values / total
    return {state: float(normalized[i]) for i, state in enumerate(bn.variables[query].states)}
