"""Parser for the line-oriented hierarchical event block format.

LLM extraction emits blocks of the shape::

    Event 1
    event: <name>
    event_id: ev1
    description: <text>
    participants: <child name> ev1.1_P0.5, ...
    Gate: and|or|xor
    Relations: ev1.1>ev1.2, ...

``xxxx`` marks an empty field.  Deeper levels use ``Subevent`` /
``subevent:`` (and further ``sub`` prefixes).  Input is noisy by nature:
unknown lines are skipped with a warning instead of failing the parse.
"""

from __future__ import annotations

import logging
import re

from .schema import (
    Gate,
    Participant,
    SchemaEvent,
    SchemaLibrary,
    TemporalRelation,
    is_event_id,
)

log = logging.getLogger(__name__)

PLACEHOLDER = "xxxx"

_HEADER_RE = re.compile(r"^(?:sub)*event\s+[0-9][0-9.]*\s*$", re.IGNORECASE)
_NAME_RE = re.compile(r"^(?:sub)*event\s*:\s*(?P<value>.*)$", re.IGNORECASE)
_FIELD_RE = re.compile(r"^(?P<key>event_id|description|participants|gate|relations)\s*:\s*(?P<value>.*)$", re.IGNORECASE)
_PARTICIPANT_RE = re.compile(r"^(?:(?P<name>.*?)\s+)?(?P<id>ev[0-9]+(?:\.[0-9]+)*)_P(?P<imp>\S+)$")
_RELATION_RE = re.compile(r"^(?P<a>ev[0-9]+(?:\.[0-9]+)*)\s*>\s*(?P<b>ev[0-9]+(?:\.[0-9]+)*)$")


class HierarchyFormatError(ValueError):
    """Base class for block-format errors."""


class MalformedBlock(HierarchyFormatError):
    pass


class BadImportanceSuffix(HierarchyFormatError):
    pass


class BadRelationSyntax(HierarchyFormatError):
    pass


class _Block:
    def __init__(self) -> None:
        self.name: str | None = None
        self.event_id: str | None = None
        self.description = ""
        self.participants: list[tuple[str | None, str, float]] = []  # (text, child id, importance)
        self.gate = Gate.NONE
        self.relations: list[tuple[str, str]] = []
        self.touched = False


def _parse_participants(value: str, block_id: str) -> list[tuple[str | None, str, float]]:
    out: list[tuple[str | None, str, float]] = []
    for entry in value.split(","):
        entry = entry.strip()
        if not entry:
            continue
        match = _PARTICIPANT_RE.match(entry)
        if not match:
            raise BadImportanceSuffix(f"{block_id}: participant entry {entry!r} lacks a parseable _P importance suffix")
        try:
            importance = float(match.group("imp"))
        except ValueError as exc:
            raise BadImportanceSuffix(f"{block_id}: importance {match.group('imp')!r} is not a number") from exc
        if not (0.0 <= importance <= 1.0):
            raise BadImportanceSuffix(f"{block_id}: importance {importance} outside [0, 1]")
        name = match.group("name")
        out.append((name.strip() if name else None, match.group("id"), importance))
    return out


def _parse_relations(value: str, block_id: str) -> list[tuple[str, str]]:
    out = []
    for entry in value.split(","):
        entry = entry.strip()
        if not entry:
            continue
        match = _RELATION_RE.match(entry)
        if not match:
            raise BadRelationSyntax(f"{block_id}: relation entry {entry!r} is not of the form evX>evY")
        out.append((match.group("a"), match.group("b")))
    return out


def parse_hierarchy_text(text: str, *, warnings: list[str] | None = None) -> SchemaLibrary:
    """Parse block-format text into a SchemaLibrary.

    Participants referencing ids with no block of their own become stub
    events named after the participant text; the stubs and every other
    recovery are reported through ``warnings`` (and the module logger).
    """

    def warn(message: str) -> None:
        log.warning("%s", message)
        if warnings is not None:
            warnings.append(message)

    blocks: list[_Block] = []
    current: _Block | None = None

    def flush() -> None:
        nonlocal current
        if current is None or not current.touched:
            current = None
            return
        if current.event_id is None:
            label = current.name or "<unnamed>"
            raise MalformedBlock(f"block {label!r} has no event_id")
        blocks.append(current)
        current = None

    for raw_line in text.splitlines():
        line = raw_line.strip()
        if not line:
            continue
        if _HEADER_RE.match(line):
            flush()
            current = _Block()
            continue
        name_match = _NAME_RE.match(line)
        field_match = _FIELD_RE.match(line)
        if field_match and field_match.group("key").lower() == "event_id":
            if current is None:
                current = _Block()
            value = field_match.group("value").strip()
            if current.event_id is not None:
                flush()
                current = _Block()
            if not is_event_id(value):
                raise MalformedBlock(f"event_id {value!r} does not match ev<digits>[.<digits>...]")
            current.event_id = value
            current.touched = True
            continue
        if name_match:
            if current is None or current.name is not None:
                flush()
                current = _Block()
            value = name_match.group("value").strip()
            current.name = "" if value.lower() == PLACEHOLDER else value
            current.touched = True
            continue
        if field_match:
            if current is None:
                current = _Block()
            key = field_match.group("key").lower()
            value = field_match.group("value").strip()
            blank = not value or value.lower() == PLACEHOLDER
            block_id = current.event_id or current.name or "<block>"
            if key == "description":
                current.description = "" if blank else value
            elif key == "participants":
                current.participants = [] if blank else _parse_participants(value, block_id)
            elif key == "gate":
                if blank:
                    current.gate = Gate.NONE
                else:
                    token = value.lower()
                    try:
                        current.gate = Gate(token)
                    except ValueError:
                        warn(f"{block_id}: unknown gate token {value!r}, treating as none")
                        current.gate = Gate.NONE
            elif key == "relations":
                current.relations = [] if blank else _parse_relations(value, block_id)
            current.touched = True
            continue
        warn(f"skipping unrecognized line: {line!r}")
    flush()

    events: dict[str, SchemaEvent] = {}
    relations: list[tuple[str, str]] = []
    stub_names: dict[str, str] = {}
    for block in blocks:
        assert block.event_id is not None
        if block.event_id in events:
            raise MalformedBlock(f"duplicate event_id {block.event_id!r}")
        name = block.name
        if not name:
            warn(f"{block.event_id}: missing or placeholder name, using the id")
            name = block.event_id
        events[block.event_id] = SchemaEvent(
            id=block.event_id,
            name=name,
            description=block.description,
            participants=tuple(
                Participant(child_id=child, importance=imp)
                for _, child, imp in block.participants
            ),
            gate=block.gate,
        )
        for text_name, child, _ in block.participants:
            if text_name and child not in stub_names:
                stub_names[child] = text_name
        relations.extend(block.relations)

    for block in blocks:
        for _, child, _ in block.participants:
            if child not in events:
                stub_name = stub_names.get(child, child)
                warn(f"participant {child} of {block.event_id} has no block, creating stub {stub_name!r}")
                events[child] = SchemaEvent(id=child, name=stub_name)

    kept: list[TemporalRelation] = []
    seen: set[tuple[str, str]] = set()
    for subject, target in relations:
        if subject not in events or target not in events:
            warn(f"dropping relation {subject}>{target}: unknown event id")
            continue
        if (subject, target) in seen:
            continue
        seen.add((subject, target))
        kept.append(TemporalRelation(subject=subject, object=target))

    return SchemaLibrary(contexts=(), events=events, relations=tuple(kept))
