"""Folding many schema libraries into one integrated library.

Contexts are unioned in order, events are merged by normalized name
(first occurrence keeps its id), and relations are remapped through the
name-to-id table and deduplicated.  Merging never produces an invalid
library: duplicate parent links, hierarchy cycles, self-relations, and
sibling temporal cycles introduced by the union are dropped with a
logged warning.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .schema import (
    Gate,
    Participant,
    SchemaEvent,
    SchemaLibrary,
    TemporalRelation,
    id_sort_key,
    normalize_name,
    validate,
)

log = logging.getLogger(__name__)


class InvalidInput(ValueError):
    """An input library failed validation."""


class NameMismatch(ValueError):
    """merge_event_details called on differently named events."""


def build_name_to_id(lib: SchemaLibrary) -> dict[str, str]:
    """Normalized event name -> id of the first event (by id sort) bearing it."""
    out: dict[str, str] = {}
    for event in lib.events_sorted():
        out.setdefault(normalize_name(event.name), event.id)
    return out


def merge_event_details(a: SchemaEvent, b: SchemaEvent) -> SchemaEvent:
    """Fold b into a: a keeps id/name, union participants with max importance.

    Participants are expected to be expressed over a shared id space, so the
    union is keyed by child id.  Gate conflicts keep a's gate and warn.
    """
    if normalize_name(a.name) != normalize_name(b.name):
        raise NameMismatch(f"cannot merge {a.name!r} with {b.name!r}")
    gate = a.gate
    if a.gate is Gate.NONE:
        gate = b.gate
    elif b.gate is not Gate.NONE and b.gate is not a.gate:
        log.warning("gate conflict on %r: keeping %s, discarding %s", a.name, a.gate.value, b.gate.value)
    merged: dict[str, float] = {p.child_id: p.importance for p in a.participants}
    order = [p.child_id for p in a.participants]
    for part in b.participants:
        if part.child_id in merged:
            merged[part.child_id] = max(merged[part.child_id], part.importance)
        else:
            merged[part.child_id] = part.importance
            order.append(part.child_id)
    return SchemaEvent(
        id=a.id,
        name=a.name,
        description=a.description or b.description,
        participants=tuple(Participant(child_id=c, importance=merged[c]) for c in order),
        gate=gate,
    )


@dataclass
class _MergedEvent:
    event_id: str
    name: str
    description: str
    gate: Gate
    children: dict[str, float] = field(default_factory=dict)  # child normalized name -> importance
    child_order: list[str] = field(default_factory=list)


def _fresh_id(used: set[str]) -> str:
    n = 1
    while f"ev{n}" in used:
        n += 1
    return f"ev{n}"


def merge(libs: list[SchemaLibrary]) -> SchemaLibrary:
    """Merge libraries in order; result always validates with no errors."""
    for i, lib in enumerate(libs):
        report = validate(lib)
        if not report.ok:
            raise InvalidInput(f"library {i} fails validation: {report.errors[0].code} on {report.errors[0].ref}")

    contexts: list[str] = []
    for lib in libs:
        for ctx in lib.contexts:
            if ctx not in contexts:
                contexts.append(ctx)

    merged: dict[str, _MergedEvent] = {}  # normalized name -> merged event
    name_to_id: dict[str, str] = {}
    used_ids: set[str] = set()
    order: list[str] = []  # normalized names in first-occurrence order

    for lib in libs:
        id_to_name = {e.id: normalize_name(e.name) for e in lib.events.values()}
        for event in lib.events_sorted():
            norm = normalize_name(event.name)
            incoming_children = [(id_to_name[p.child_id], p.importance) for p in event.participants]
            if norm not in merged:
                event_id = event.id
                if event_id in used_ids:
                    event_id = _fresh_id(used_ids)
                    log.warning("id %s already taken, %r gets fresh id %s", event.id, event.name, event_id)
                used_ids.add(event_id)
                name_to_id[norm] = event_id
                entry = _MergedEvent(event_id=event_id, name=event.name, description=event.description, gate=event.gate)
                merged[norm] = entry
                order.append(norm)
            else:
                entry = merged[norm]
                if not entry.description:
                    entry.description = event.description
                if entry.gate is Gate.NONE:
                    entry.gate = event.gate
                elif event.gate is not Gate.NONE and event.gate is not entry.gate:
                    log.warning("gate conflict on %r: keeping %s, discarding %s", entry.name, entry.gate.value, event.gate.value)
            for child_name, importance in incoming_children:
                if child_name in entry.children:
                    entry.children[child_name] = max(entry.children[child_name], importance)
                else:
                    entry.children[child_name] = importance
                    entry.child_order.append(child_name)

    # materialize participants, keeping the hierarchy a forest
    parent_of: dict[str, str] = {}

    def would_cycle(parent_id: str, child_id: str) -> bool:
        node: str | None = parent_id
        while node is not None:
            if node == child_id:
                return True
            node = parent_of.get(node)
        return False

    events: dict[str, SchemaEvent] = {}
    for norm in order:
        entry = merged[norm]
        participants: list[Participant] = []
        for child_name in entry.child_order:
            child_id = name_to_id[child_name]
            if child_id == entry.event_id:
                log.warning("dropping self-participant %r on %s", child_name, entry.event_id)
                continue
            if child_id in parent_of and parent_of[child_id] != entry.event_id:
                log.warning("dropping duplicate parent link %s -> %s (parent already %s)",
                            entry.event_id, child_id, parent_of[child_id])
                continue
            if would_cycle(entry.event_id, child_id):
                log.warning("dropping participant link %s -> %s: would create a hierarchy cycle",
                            entry.event_id, child_id)
                continue
            parent_of[child_id] = entry.event_id
            participants.append(Participant(child_id=child_id, importance=entry.children[child_name]))
        events[entry.event_id] = SchemaEvent(
            id=entry.event_id,
            name=entry.name,
            description=entry.description,
            participants=tuple(participants),
            gate=entry.gate,
        )

    # relations: remap by name, dedupe, keep sibling groups acyclic
    relations: list[TemporalRelation] = []
    seen: set[tuple[str, str]] = set()
    sibling_successors: dict[str, set[str]] = {}

    def sibling_reachable(start: str, goal: str) -> bool:
        stack, visited = [start], set()
        while stack:
            node = stack.pop()
            if node == goal:
                return True
            if node in visited:
                continue
            visited.add(node)
            stack.extend(sibling_successors.get(node, ()))
        return False

    for lib in libs:
        id_to_name = {e.id: normalize_name(e.name) for e in lib.events.values()}
        for rel in lib.relations:
            subject_name = id_to_name[rel.subject]
            object_name = id_to_name[rel.object]
            if subject_name not in name_to_id or object_name not in name_to_id:
                log.warning("dropping relation %s>%s: endpoint name not in merged library", rel.subject, rel.object)
                continue
            subject = name_to_id[subject_name]
            target = name_to_id[object_name]
            if subject == target:
                log.warning("dropping relation %s>%s: endpoints merged into one event", rel.subject, rel.object)
                continue
            if (subject, target) in seen:
                continue
            if parent_of.get(subject) == parent_of.get(target) and sibling_reachable(target, subject):
                log.warning("dropping relation %s>%s: would create a sibling temporal cycle", subject, target)
                continue
            seen.add((subject, target))
            if parent_of.get(subject) == parent_of.get(target):
                sibling_successors.setdefault(subject, set()).add(target)
            relations.append(TemporalRelation(subject=subject, object=target))

    merged_events = {e.id: e for e in sorted(events.values(), key=lambda e: id_sort_key(e.id))}
    return SchemaLibrary(contexts=tuple(contexts), events=merged_events, relations=tuple(relations))
