"""Aligning extracted events with schema events and instantiating matches.

Composite similarity is a convex combination of embedding cosine
(semantic) and parameter-set Jaccard (structural).  Each extracted event
goes to its argmax schema node; collisions are resolved greedily by
score, displaced events fall back to their next-best node.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .embedding import EmbeddingProvider, cosine, embed
from .ingest import ExtractedEvent
from .schema import Gate, SchemaEvent, SchemaLibrary, id_sort_key, schema_text

log = logging.getLogger(__name__)


class UnknownId(KeyError):
    pass


class TextSource(Enum):
    NAME = "name"
    NAME_PLUS_DESCRIPTION = "name_plus_description"


@dataclass(frozen=True)
class MatchConfig:
    alpha: float = 0.7
    beta: float = 0.3
    min_sim: float = 0.35
    text_source: TextSource = TextSource.NAME_PLUS_DESCRIPTION

    def __post_init__(self) -> None:
        if self.alpha < 0 or self.beta < 0 or self.alpha + self.beta <= 0:
            raise ValueError("alpha and beta must be non-negative with a positive sum")
        total = self.alpha + self.beta
        object.__setattr__(self, "alpha", self.alpha / total)
        object.__setattr__(self, "beta", self.beta / total)


@dataclass(frozen=True)
class Match:
    extracted_id: str
    schema_id: str
    composite: float
    semantic: float
    structural: float


@dataclass(frozen=True)
class InstantiatedGraph:
    library: SchemaLibrary
    matched: Mapping[str, str]  # schema id -> extracted event id
    attributes: Mapping[str, frozenset[str]]
    extractions: Mapping[str, ExtractedEvent] = field(default_factory=dict)

    def is_matched(self, schema_id: str) -> bool:
        return schema_id in self.matched

    def node_ids(self) -> list[str]:
        return sorted(self.library.events, key=id_sort_key)


@dataclass(frozen=True)
class ConsistencyReport:
    gate_violations: tuple[tuple[str, str, str], ...] = ()
    temporal_violations: tuple[tuple[str, str], ...] = ()

    @property
    def ok(self) -> bool:
        return not self.gate_violations and not self.temporal_violations


def schema_parameters(
    lib: SchemaLibrary,
    extra: Mapping[str, frozenset[str]] | None = None,
) -> dict[str, frozenset[str]]:
    """Per-node parameter set: participant child names plus declared role tokens."""
    out: dict[str, frozenset[str]] = {}
    for event in lib.events.values():
        names = frozenset(lib.name_of(p.child_id) for p in event.participants)
        if extra and event.id in extra:
            names |= extra[event.id]
        out[event.id] = names
    return out


def _event_text(event: SchemaEvent, cfg: MatchConfig) -> str:
    return schema_text(event, include_description=cfg.text_source is TextSource.NAME_PLUS_DESCRIPTION)


def sem_sim(
    e_ext: ExtractedEvent,
    e_schema: SchemaEvent,
    provider: EmbeddingProvider,
    cfg: MatchConfig = MatchConfig(),
) -> float:
    """Clamped cosine of the two event embeddings, in [0, 1]."""
    ext_vec = np.asarray(e_ext.embedding, dtype=np.float64) if e_ext.embedding is not None \
        else embed(provider, e_ext.text)
    schema_vec = embed(provider, _event_text(e_schema, cfg))
    return min(1.0, max(0.0, cosine(ext_vec, schema_vec)))


def str_sim(ext_params: frozenset[str], schema_params: frozenset[str]) -> float:
    """Jaccard overlap of parameter sets; 1.0 when both empty, 0.0 when one is."""
    if not ext_params and not schema_params:
        return 1.0
    if not ext_params or not schema_params:
        return 0.0
    return len(ext_params & schema_params) / len(ext_params | schema_params)


def composite_sim(
    e_ext: ExtractedEvent,
    e_schema: SchemaEvent,
    provider: EmbeddingProvider,
    cfg: MatchConfig = MatchConfig(),
    *,
    lib: SchemaLibrary | None = None,
    schema_params: frozenset[str] | None = None,
) -> float:
    """alpha * semantic + beta * structural similarity.

    Schema parameters are the participant child names resolved through
    ``lib`` (falling back to child ids without one) unless given directly.
    """
    sem = sem_sim(e_ext, e_schema, provider, cfg)
    if schema_params is None:
        if lib is not None:
            schema_params = frozenset(lib.name_of(p.child_id) for p in e_schema.participants)
        else:
            schema_params = frozenset(p.child_id for p in e_schema.participants)
    return cfg.alpha * sem + cfg.beta * str_sim(e_ext.parameters, schema_params)


@dataclass(frozen=True)
class MatchReport:
    matches: tuple[Match, ...]
    unmatched: tuple[str, ...]  # extracted ids with no assignment


def match_events(
    exts: Sequence[ExtractedEvent],
    lib: SchemaLibrary,
    provider: EmbeddingProvider,
    cfg: MatchConfig = MatchConfig(),
    extra_schema_params: Mapping[str, frozenset[str]] | None = None,
) -> MatchReport:
    """Assign extracted events to schema nodes by composite similarity.

    Deterministic: ties go to the lowest schema id, collisions keep the
    higher-scoring event and displaced events retry their next-best node.
    """
    params = schema_parameters(lib, extra_schema_params)
    schema_events = sorted(lib.events.values(), key=lambda e: id_sort_key(e.id))
    vector_cache: dict[str, np.ndarray] = {}

    def text_vector(text: str) -> np.ndarray:
        if text not in vector_cache:
            vector_cache[text] = embed(provider, text)
        return vector_cache[text]

    candidates: dict[str, list[tuple[float, float, float, str]]] = {}
    for ext in exts:
        ext_vec = np.asarray(ext.embedding, dtype=np.float64) if ext.embedding is not None \
            else text_vector(ext.text)
        options = []
        for schema_event in schema_events:
            sem = min(1.0, max(0.0, cosine(ext_vec, text_vector(_event_text(schema_event, cfg)))))
            structural = str_sim(ext.parameters, params[schema_event.id])
            sim = cfg.alpha * sem + cfg.beta * structural
            if sim >= cfg.min_sim:
                options.append((sim, sem, structural, schema_event.id))
        # preference order: best similarity first, lowest id on ties
        options.sort(key=lambda o: (-o[0], id_sort_key(o[3])))
        candidates[ext.id] = options

    assigned: dict[str, tuple[float, str]] = {}  # schema id -> (sim, ext id)
    cursor = {ext.id: 0 for ext in exts}
    queue = [ext.id for ext in exts]
    unmatched: list[str] = []
    chosen: dict[str, tuple[float, float, float, str]] = {}
    while queue:
        ext_id = queue.pop(0)
        options = candidates[ext_id]
        placed = False
        while cursor[ext_id] < len(options):
            sim, sem, structural, schema_id = options[cursor[ext_id]]
            holder = assigned.get(schema_id)
            if holder is None or holder[0] < sim:
                if holder is not None:
                    log.info("%s displaces %s on %s (%.3f > %.3f)", ext_id, holder[1], schema_id, sim, holder[0])
                    cursor[holder[1]] += 1
                    queue.append(holder[1])
                    chosen.pop(holder[1], None)
                assigned[schema_id] = (sim, ext_id)
                chosen[ext_id] = (sim, sem, structural, schema_id)
                placed = True
                break
            cursor[ext_id] += 1
        if not placed:
            unmatched.append(ext_id)

    order = {ext.id: i for i, ext in enumerate(exts)}
    matches = tuple(
        Match(extracted_id=ext_id, schema_id=info[3], composite=info[0], semantic=info[1], structural=info[2])
        for ext_id, info in sorted(chosen.items(), key=lambda kv: order[kv[0]])
    )
    return MatchReport(matches=matches, unmatched=tuple(sorted(unmatched, key=lambda e: order[e])))


def instantiate(
    matches: Sequence[Match],
    lib: SchemaLibrary,
    exts: Sequence[ExtractedEvent],
) -> InstantiatedGraph:
    """Bind matches onto the schema: matched nodes inherit extracted parameters."""
    by_id = {e.id: e for e in exts}
    params = schema_parameters(lib)
    matched: dict[str, str] = {}
    for match in matches:
        if match.schema_id not in lib.events:
            raise UnknownId(match.schema_id)
        if match.extracted_id not in by_id:
            raise UnknownId(match.extracted_id)
        matched[match.schema_id] = match.extracted_id
    attributes: dict[str, frozenset[str]] = {}
    for event_id in lib.events:
        base = params[event_id]
        if event_id in matched:
            base = base | by_id[matched[event_id]].parameters
        attributes[event_id] = base
    return InstantiatedGraph(
        library=lib,
        matched=matched,
        attributes=attributes,
        extractions={e.id: e for e in exts if e.id in set(matched.values())},
    )


def consistency_check(g: InstantiatedGraph, lib: SchemaLibrary | None = None) -> ConsistencyReport:
    """Gate and temporal checks over the matched node set."""
    lib = lib if lib is not None else g.library
    gate_violations: list[tuple[str, str, str]] = []
    for event in lib.events_sorted():
        if not event.participants:
            continue
        matched_children = [p.child_id for p in event.participants if g.is_matched(p.child_id)]
        if event.gate is Gate.AND and g.is_matched(event.id):
            missing = [p.child_id for p in event.participants if not g.is_matched(p.child_id)]
            if missing:
                gate_violations.append((event.id, "and", f"children not matched: {', '.join(missing)}"))
        elif event.gate is Gate.OR and g.is_matched(event.id):
            if not matched_children:
                gate_violations.append((event.id, "or", "no child matched"))
        elif event.gate is Gate.XOR:
            if len(matched_children) >= 2:
                gate_violations.append((event.id, "xor", f"multiple children matched: {', '.join(matched_children)}"))

    temporal_violations: list[tuple[str, str]] = []
    for rel in lib.relations:
        first = g.extractions.get(g.matched.get(rel.subject, ""))
        second = g.extractions.get(g.matched.get(rel.object, ""))
        if first is not None and second is not None and first.time and second.time:
            if second.time < first.time:
                temporal_violations.append((
                    f"{rel.subject}>{rel.object}",
                    f"{rel.object} at {second.time.isoformat()} precedes {rel.subject} at {first.time.isoformat()}",
                ))
    return ConsistencyReport(
        gate_violations=tuple(gate_violations),
        temporal_violations=tuple(temporal_violations),
    )
