"""Core event-schema data model, structural validation, and the SDF file format.

A schema library is a forest of events (each event may list weighted
sub-event participants and a logic gate over them) plus happens-before
relations between events.  The on-disk serialization (SDF) is a JSON
document with top-level keys ``@context``, ``events``, ``relations``.
"""

from __future__ import annotations

import enum
import json
import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple

log = logging.getLogger(__name__)

EVENT_ID_RE = re.compile(r"ev[0-9]+(?:\.[0-9]+)*\Z")


class SchemaFormatError(ValueError):
    """Base class for SDF document errors."""


class MalformedDocument(SchemaFormatError):
    pass


class DuplicateId(SchemaFormatError):
    pass


class DanglingReference(SchemaFormatError):
    pass


class ImportanceOutOfRange(SchemaFormatError):
    pass


class Gate(enum.Enum):
    AND = "and"
    OR = "or"
    XOR = "xor"
    NONE = "none"


def is_event_id(text: str) -> bool:
    return bool(EVENT_ID_RE.match(text))


def id_sort_key(event_id: str) -> tuple:
    """Numeric sort key for dotted event ids (ev1.10 sorts after ev1.2).

    Total: ids outside the grammar sort after valid ones, lexically.
    """
    if is_event_id(event_id):
        return (0, tuple(int(part) for part in event_id[2:].split(".")), event_id)
    return (1, (), event_id)


def dotted_parent(event_id: str) -> str | None:
    """The id implied by dropping the last dotted component, if any."""
    return event_id.rsplit(".", 1)[0] if "." in event_id else None


def normalize_name(name: str) -> str:
    return " ".join(name.lower().split())


@dataclass(frozen=True)
class Participant:
    child_id: str
    importance: float


@dataclass(frozen=True)
class SchemaEvent:
    id: str
    name: str
    description: str = ""
    participants: tuple[Participant, ...] = ()
    gate: Gate = Gate.NONE

    def child_ids(self) -> tuple[str, ...]:
        return tuple(p.child_id for p in self.participants)


@dataclass(frozen=True)
class TemporalRelation:
    """subject happens before object."""

    subject: str
    object: str


@dataclass(frozen=True)
class SchemaLibrary:
    contexts: tuple[str, ...] = ()
    events: Mapping[str, SchemaEvent] = field(default_factory=dict)
    relations: tuple[TemporalRelation, ...] = ()

    def events_sorted(self) -> list[SchemaEvent]:
        return sorted(self.events.values(), key=lambda e: id_sort_key(e.id))

    def parent_map(self) -> dict[str, str]:
        """child id -> parent id, first parent wins on (invalid) duplicates."""
        parents: dict[str, str] = {}
        for event in self.events_sorted():
            for part in event.participants:
                parents.setdefault(part.child_id, event.id)
        return parents

    def roots(self) -> list[str]:
        parents = self.parent_map()
        return [e.id for e in self.events_sorted() if e.id not in parents]

    def depth_map(self) -> dict[str, int]:
        parents = self.parent_map()
        depths: dict[str, int] = {}

        def depth(node: str, trail: set[str]) -> int:
            if node in depths:
                return depths[node]
            parent = parents.get(node)
            if parent is None or parent in trail or parent not in self.events:
                depths[node] = 0
            else:
                depths[node] = depth(parent, trail | {node}) + 1
            return depths[node]

        for event_id in self.events:
            depth(event_id, set())
        return depths

    def name_of(self, event_id: str) -> str:
        return self.events[event_id].name


def schema_text(event: SchemaEvent, include_description: bool = True) -> str:
    """Text used when embedding a schema event."""
    if include_description and event.description:
        return f"{event.name} {event.description}".strip()
    return event.name


def library_from(
    events: Iterable[SchemaEvent],
    relations: Iterable[TemporalRelation] = (),
    contexts: Iterable[str] = (),
) -> SchemaLibrary:
    """Build a library, rejecting duplicate event ids."""
    table: dict[str, SchemaEvent] = {}
    for event in events:
        if event.id in table:
            raise DuplicateId(f"duplicate event id {event.id!r}")
        table[event.id] = event
    seen: set[str] = set()
    ordered_contexts = tuple(c for c in contexts if not (c in seen or seen.add(c)))
    return SchemaLibrary(
        contexts=ordered_contexts, events=table, relations=tuple(relations)
    )


# --- validation -------------------------------------------------------------

class Issue(NamedTuple):
    code: str
    ref: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[Issue, ...] = ()
    warnings: tuple[Issue, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors


def _strongly_connected(nodes: list[str], edges: dict[str, list[str]]) -> list[list[str]]:
    """Tarjan SCC, iterative; returns components in deterministic order."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    counter = 0
    out: list[list[str]] = []

    for root in nodes:
        if root in index:
            continue
        work: list[tuple[str, Iterator[str]]] = [(root, iter(edges.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(edges.get(nxt, ()))))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                out.append(sorted(component))
    return out


def validate(lib: SchemaLibrary) -> ValidationReport:
    """Check every structural invariant; violations are data, not exceptions."""
    errors: list[Issue] = []
    warnings: list[Issue] = []

    for key, event in lib.events.items():
        if key != event.id:
            errors.append(Issue("ID_KEY_MISMATCH", key, f"keyed {key!r} but event id is {event.id!r}"))
        if not is_event_id(event.id):
            errors.append(Issue("BAD_ID", event.id, "event id does not match ev<digits>[.<digits>...]"))
        if not event.name.strip():
            errors.append(Issue("EMPTY_NAME", event.id, "event name is empty"))
        for part in event.participants:
            if not (0.0 <= part.importance <= 1.0):
                errors.append(
                    Issue("BAD_IMPORTANCE", event.id, f"participant {part.child_id} importance {part.importance} outside [0, 1]")
                )
            if part.child_id not in lib.events:
                errors.append(Issue("DANGLING_PARTICIPANT", event.id, f"participant {part.child_id} is not a known event"))
        if event.gate is not Gate.NONE and not event.participants:
            warnings.append(Issue("GATE_WITHOUT_PARTICIPANTS", event.id, f"gate {event.gate.value} on an event with no participants"))

    # hierarchy: at most one parent, no cycles
    parent_links: dict[str, list[str]] = {}
    for event in lib.events_sorted():
        for part in event.participants:
            if part.child_id in lib.events:
                parent_links.setdefault(part.child_id, []).append(event.id)
    for child in sorted(parent_links, key=_safe_sort_key):
        distinct = sorted(set(parent_links[child]))
        if len(distinct) > 1:
            errors.append(Issue("MULTIPLE_PARENTS", child, f"listed by parents {', '.join(distinct)}"))

    child_to_parent_edges = {c: sorted(set(ps)) for c, ps in parent_links.items()}
    node_order = sorted(lib.events, key=_safe_sort_key)
    for component in _strongly_connected(node_order, child_to_parent_edges):
        if len(component) > 1 or component[0] in child_to_parent_edges.get(component[0], []):
            errors.append(Issue("CYCLE_IN_HIERARCHY", component[0], f"hierarchy cycle through {', '.join(component)}"))

    # relations
    parents = lib.parent_map()
    sibling_edges: dict[str | None, dict[str, list[str]]] = {}
    sibling_nodes: dict[str | None, set[str]] = {}
    for i, rel in enumerate(lib.relations):
        missing = [x for x in (rel.subject, rel.object) if x not in lib.events]
        if missing:
            errors.append(Issue("DANGLING_RELATION", str(i), f"relation references unknown id {missing[0]!r}"))
            continue
        if rel.subject == rel.object:
            errors.append(Issue("SELF_RELATION", str(i), f"relation {rel.subject}>{rel.object} relates an event to itself"))
            continue
        p_subj, p_obj = parents.get(rel.subject), parents.get(rel.object)
        if p_subj != p_obj:
            warnings.append(Issue("NON_SIBLING_RELATION", str(i), f"{rel.subject}>{rel.object} crosses sibling groups"))
            continue
        group = sibling_edges.setdefault(p_subj, {})
        group.setdefault(rel.subject, []).append(rel.object)
        sibling_nodes.setdefault(p_subj, set()).update((rel.subject, rel.object))
    for parent in sorted(sibling_nodes, key=lambda p: (p is not None, p or "")):
        nodes = sorted(sibling_nodes[parent], key=_safe_sort_key)
        for component in _strongly_connected(nodes, sibling_edges[parent]):
            if len(component) > 1:
                errors.append(Issue("TEMPORAL_CYCLE", component[0], f"temporal cycle among siblings {', '.join(component)}"))

    errors.sort(key=lambda issue: (issue.code, _safe_sort_key(issue.ref)))
    warnings.sort(key=lambda issue: (issue.code, _safe_sort_key(issue.ref)))
    return ValidationReport(errors=tuple(errors), warnings=tuple(warnings))


def _safe_sort_key(ref: str) -> tuple:
    return id_sort_key(ref)


# --- SDF serialization ------------------------------------------------------

_GATE_TOKENS = {g.value: g for g in Gate}


def _parse_gate(token: object, where: str) -> Gate:
    if token is None or token == "":
        return Gate.NONE
    if isinstance(token, str):
        gate = _GATE_TOKENS.get(token.strip().lower())
        if gate is not None:
            return gate
        log.warning("unknown gate token %r on %s, treating as none", token, where)
        return Gate.NONE
    raise MalformedDocument(f"gate on {where} must be a string, got {type(token).__name__}")


def parse_sdf(document: str) -> SchemaLibrary:
    """Parse an SDF document into a SchemaLibrary.

    Participants referencing ids with no event object of their own become
    stub events named after the id.  Relations to unknown ids are an error.
    """
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise MalformedDocument("top level must be an object")
    for key in ("@context", "events", "relations"):
        if key not in data:
            raise MalformedDocument(f"missing top-level key {key!r}")
        if not isinstance(data[key], list):
            raise MalformedDocument(f"{key!r} must be a list")

    contexts: list[str] = []
    for ctx in data["@context"]:
        if not isinstance(ctx, str):
            raise MalformedDocument("@context entries must be strings")
        if ctx not in contexts:
            contexts.append(ctx)

    events: dict[str, SchemaEvent] = {}
    for obj in data["events"]:
        if not isinstance(obj, dict):
            raise MalformedDocument("event entries must be objects")
        event_id = obj.get("@id")
        if not isinstance(event_id, str) or not is_event_id(event_id):
            raise MalformedDocument(f"bad or missing @id: {event_id!r}")
        if event_id in events:
            raise DuplicateId(f"duplicate event id {event_id!r}")
        name = obj.get("name")
        if not isinstance(name, str) or not name.strip():
            raise MalformedDocument(f"event {event_id} needs a non-empty name")
        description = obj.get("description", "")
        if not isinstance(description, str):
            raise MalformedDocument(f"event {event_id} description must be a string")
        participants: list[Participant] = []
        seen_children: set[str] = set()
        for part in obj.get("participants", []):
            if not isinstance(part, dict) or "event_id" not in part or "importance" not in part:
                raise MalformedDocument(f"event {event_id}: participants need event_id and importance")
            child = part["event_id"]
            if not isinstance(child, str) or not is_event_id(child):
                raise MalformedDocument(f"event {event_id}: bad participant id {child!r}")
            importance = part["importance"]
            if not isinstance(importance, (int, float)) or isinstance(importance, bool):
                raise MalformedDocument(f"event {event_id}: importance must be a number")
            if not (0.0 <= float(importance) <= 1.0):
                raise ImportanceOutOfRange(
                    f"event {event_id}: participant {child} importance {importance} outside [0, 1]"
                )
            if child in seen_children:
                log.warning("event %s lists participant %s twice, keeping first", event_id, child)
                continue
            seen_children.add(child)
            participants.append(Participant(child_id=child, importance=float(importance)))
        gate = _parse_gate(obj.get("gate", "none"), event_id)
        events[event_id] = SchemaEvent(
            id=event_id, name=name, description=description,
            participants=tuple(participants), gate=gate,
        )

    for event in list(events.values()):
        for part in event.participants:
            if part.child_id not in events:
                log.warning("participant %s of %s has no event object, creating stub", part.child_id, event.id)
                events[part.child_id] = SchemaEvent(id=part.child_id, name=part.child_id)

    relations: list[TemporalRelation] = []
    for obj in data["relations"]:
        if not isinstance(obj, dict) or "relationSubject" not in obj or "relationObject" not in obj:
            raise MalformedDocument("relations need relationSubject and relationObject")
        subject, target = obj["relationSubject"], obj["relationObject"]
        for endpoint in (subject, target):
            if not isinstance(endpoint, str):
                raise MalformedDocument("relation endpoints must be strings")
            if endpoint not in events:
                raise DanglingReference(endpoint)
        relations.append(TemporalRelation(subject=subject, object=target))

    return SchemaLibrary(contexts=tuple(contexts), events=events, relations=tuple(relations))


def serialize_sdf(lib: SchemaLibrary) -> str:
    """Deterministic SDF text: events sorted by id, relations in order."""
    doc = {
        "@context": list(lib.contexts),
        "events": [
            {
                "@id": event.id,
                "name": event.name,
                "description": event.description,
                "participants": [
                    {"event_id": p.child_id, "importance": p.importance}
                    for p in event.participants
                ],
                "gate": event.gate.value,
            }
            for event in lib.events_sorted()
        ],
        "relations": [
            {"relationSubject": r.subject, "relationObject": r.object}
            for r in lib.relations
        ],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
