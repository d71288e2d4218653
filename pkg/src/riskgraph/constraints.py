"""Logical-constraint refinement of raw node scores and coreference-based
argument inheritance.

Rules 1-3 (child-to-parent, AND-siblings, precursor closure) are monotone
and iterated to a least fixpoint; XOR exclusion runs exactly once
afterwards, keeping only the highest-scoring predicted child per XOR
parent.  Every forced or suppressed node is recorded in the audit trail.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Mapping, Sequence

from .ingest import CorefClusters
from .matching import InstantiatedGraph
from .schema import Gate, SchemaLibrary, id_sort_key

log = logging.getLogger(__name__)


class RuleKind(Enum):
    CHILD_TO_PARENT = "child_to_parent"
    AND_SIBLINGS = "and_siblings"
    XOR_EXCLUSION = "xor_exclusion"
    PRECURSOR_CLOSURE = "precursor_closure"


@dataclass(frozen=True)
class ConstraintRule:
    kind: RuleKind
    enabled: bool = True


DEFAULT_RULES: tuple[ConstraintRule, ...] = tuple(ConstraintRule(kind) for kind in RuleKind)


class NodeState(Enum):
    MATCHED = "matched"
    PREDICTED = "predicted"
    NOT_PREDICTED = "not_predicted"


@dataclass(frozen=True)
class AppliedRule:
    rule: RuleKind
    node: str
    iteration: int


@dataclass(frozen=True)
class PredictionResult:
    raw_scores: Mapping[str, float]
    states: Mapping[str, NodeState]
    applied_rules: tuple[AppliedRule, ...] = ()
    coref_arguments: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def predicted(self) -> list[str]:
        return sorted((n for n, s in self.states.items() if s is NodeState.PREDICTED), key=id_sort_key)

    def matched(self) -> list[str]:
        return sorted((n for n, s in self.states.items() if s is NodeState.MATCHED), key=id_sort_key)


def _enabled(rules: Sequence[ConstraintRule]) -> set[RuleKind]:
    return {r.kind for r in rules if r.enabled}


def apply_constraints(
    g: InstantiatedGraph,
    scores: Mapping[str, float],
    rules: Sequence[ConstraintRule] = DEFAULT_RULES,
    threshold: float = 0.5,
    initial_states: Mapping[str, NodeState] | None = None,
) -> PredictionResult:
    """Refine scores into MATCHED / PREDICTED / NOT_PREDICTED states.

    The starting PREDICTED set is scores >= threshold over unmatched nodes,
    or ``initial_states`` when given (which makes re-application of a prior
    result express the idempotence property directly).
    """
    lib = g.library
    missing = [n for n in lib.events if n not in scores]
    if missing:
        raise KeyError(f"scores missing for nodes: {missing[:3]}")
    enabled = _enabled(rules)
    node_ids = sorted(lib.events, key=id_sort_key)
    matched = {n for n in node_ids if g.is_matched(n)}
    if initial_states is not None:
        predicted = {n for n, s in initial_states.items() if s is NodeState.PREDICTED and n not in matched}
    else:
        predicted = {n for n in node_ids if n not in matched and scores[n] >= threshold}

    parents = lib.parent_map()
    audit: list[AppliedRule] = []
    precursors: dict[str, list[str]] = {}
    for rel in lib.relations:
        precursors.setdefault(rel.object, []).append(rel.subject)

    def force(node: str, rule: RuleKind, iteration: int) -> bool:
        if node in matched or node in predicted:
            return False
        predicted.add(node)
        audit.append(AppliedRule(rule=rule, node=node, iteration=iteration))
        return True

    iteration = 0
    changed = True
    while changed:
        iteration += 1
        changed = False
        active = matched | predicted
        if RuleKind.CHILD_TO_PARENT in enabled:
            for node in node_ids:
                if node in active:
                    parent = parents.get(node)
                    if parent is not None and force(parent, RuleKind.CHILD_TO_PARENT, iteration):
                        changed = True
        if RuleKind.AND_SIBLINGS in enabled:
            for node in node_ids:
                if node in predicted:
                    parent = parents.get(node)
                    if parent is not None and lib.events[parent].gate is Gate.AND:
                        for part in lib.events[parent].participants:
                            if force(part.child_id, RuleKind.AND_SIBLINGS, iteration):
                                changed = True
        if RuleKind.PRECURSOR_CLOSURE in enabled:
            for node in node_ids:
                if node in matched or node in predicted:
                    for earlier in precursors.get(node, ()):
                        if force(earlier, RuleKind.PRECURSOR_CLOSURE, iteration):
                            changed = True

    if RuleKind.XOR_EXCLUSION in enabled:
        iteration += 1
        for node in node_ids:
            event = lib.events[node]
            if event.gate is not Gate.XOR:
                continue
            contenders = [c for c in event.child_ids() if c in predicted]
            if len(contenders) < 2:
                continue
            keep = min(contenders, key=lambda c: (-scores[c], id_sort_key(c)))
            for child in contenders:
                if child != keep:
                    predicted.discard(child)
                    audit.append(AppliedRule(rule=RuleKind.XOR_EXCLUSION, node=child, iteration=iteration))

    states = {
        n: NodeState.MATCHED if n in matched
        else NodeState.PREDICTED if n in predicted
        else NodeState.NOT_PREDICTED
        for n in node_ids
    }
    return PredictionResult(raw_scores=dict(scores), states=states, applied_rules=tuple(audit))


def check_constraints(
    g: InstantiatedGraph,
    result: PredictionResult,
    rules: Sequence[ConstraintRule] = DEFAULT_RULES,
) -> list[str]:
    """Rule violations in a refined assignment; empty means consistent.

    A consequent node that XOR exclusion explicitly suppressed (present in
    the audit) counts as satisfied: exclusion overrides the monotone rules.
    """
    lib = g.library
    enabled = _enabled(rules)
    suppressed = {a.node for a in result.applied_rules if a.rule is RuleKind.XOR_EXCLUSION}

    def on(node: str) -> bool:
        return result.states[node] in (NodeState.MATCHED, NodeState.PREDICTED)

    def holds(node: str) -> bool:
        return on(node) or node in suppressed

    violations: list[str] = []
    parents = lib.parent_map()
    for node in sorted(lib.events, key=id_sort_key):
        parent = parents.get(node)
        if RuleKind.CHILD_TO_PARENT in enabled and on(node) and parent is not None and not holds(parent):
            violations.append(f"child_to_parent: {node} on but parent {parent} off")
        if (RuleKind.AND_SIBLINGS in enabled and result.states[node] is NodeState.PREDICTED
                and parent is not None and lib.events[parent].gate is Gate.AND):
            for part in lib.events[parent].participants:
                if not holds(part.child_id):
                    violations.append(f"and_siblings: {node} predicted but sibling {part.child_id} off")
    if RuleKind.PRECURSOR_CLOSURE in enabled:
        for rel in lib.relations:
            if on(rel.object) and not holds(rel.subject):
                violations.append(f"precursor_closure: {rel.object} on but precursor {rel.subject} off")
    if RuleKind.XOR_EXCLUSION in enabled:
        for node, event in lib.events.items():
            if event.gate is Gate.XOR:
                live = [c for c in event.child_ids() if result.states.get(c) is NodeState.PREDICTED]
                if len(live) >= 2:
                    violations.append(f"xor_exclusion: {node} has predicted children {', '.join(sorted(live))}")
    return violations


def coref_refine(
    result: PredictionResult,
    clusters: CorefClusters,
    g: InstantiatedGraph,
) -> PredictionResult:
    """Predicted nodes inherit parameters from extractions coreferent with
    any matched graph neighbor's extraction."""
    lib = g.library
    neighbors: dict[str, set[str]] = {n: set() for n in lib.events}
    for event in lib.events.values():
        for part in event.participants:
            if part.child_id in neighbors:
                neighbors[event.id].add(part.child_id)
                neighbors[part.child_id].add(event.id)
    for rel in lib.relations:
        if rel.subject in neighbors and rel.object in neighbors:
            neighbors[rel.subject].add(rel.object)
            neighbors[rel.object].add(rel.subject)

    inherited: dict[str, frozenset[str]] = {}
    for node, state in result.states.items():
        if state is not NodeState.PREDICTED:
            continue
        gathered: set[str] = set()
        for neighbor in neighbors[node]:
            ext_id = g.matched.get(neighbor)
            if ext_id is None:
                continue
            for member in clusters.cluster_of(ext_id):
                member_event = g.extractions.get(member)
                if member_event is not None:
                    gathered |= member_event.parameters
        inherited[node] = frozenset(gathered)
    return replace(result, coref_arguments=inherited)
