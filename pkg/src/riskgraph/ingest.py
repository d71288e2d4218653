"""Event ingestion: extraction files, a rule-based baseline extractor,
impact scoring, and coreference clustering.

Model-based extraction happens elsewhere; its output enters through
``load_extractions``.  The gazetteer-driven ``baseline_extract`` is a
deterministic stand-in good enough to drive the matching pipeline.
"""

from __future__ import annotations

import datetime as dt
import json
import logging
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .embedding import EmbeddingProvider, cosine, embed
from .schema import normalize_name

log = logging.getLogger(__name__)


class ExtractionError(ValueError):
    pass


class MalformedRecord(ExtractionError):
    pass


class DuplicateEventId(ExtractionError):
    pass


class SpanOutOfBounds(ExtractionError):
    pass


@dataclass(frozen=True)
class Document:
    id: str
    title: str
    published: dt.date | None
    paragraphs: tuple[str, ...]
    source: str = ""

    def text(self) -> str:
        return "\n\n".join(self.paragraphs)


@dataclass(frozen=True)
class ExtractedEvent:
    id: str
    doc_id: str
    trigger_text: str
    sentence_span: tuple[int, int]
    parameters: frozenset[str] = frozenset()
    time: dt.date | None = None
    severity: float | None = None
    embedding: tuple[float, ...] | None = None  # optional precomputed vector

    @property
    def text(self) -> str:
        return self.trigger_text


@dataclass(frozen=True)
class CorefClusters:
    clusters: tuple[frozenset[str], ...]
    links: tuple[tuple[str, str, float], ...] = ()

    def cluster_of(self, event_id: str) -> frozenset[str]:
        for cluster in self.clusters:
            if event_id in cluster:
                return cluster
        return frozenset({event_id})


@dataclass(frozen=True)
class ImpactScore:
    centrality: float
    magnitude: float

    @property
    def total(self) -> float:
        return self.centrality + self.magnitude


@dataclass(frozen=True)
class CorefConfig:
    param_tau: float = 0.5
    embed_tau: float = 0.85
    provider: EmbeddingProvider | None = None


def _parse_date(value: str) -> dt.date:
    return dt.date.fromisoformat(value)


def load_document(payload: str | dict) -> Document:
    """Load a document from JSON text or an already-parsed object."""
    data = json.loads(payload) if isinstance(payload, str) else payload
    if not isinstance(data, dict) or "id" not in data or "paragraphs" not in data:
        raise MalformedRecord("document needs id and paragraphs")
    paragraphs = data["paragraphs"]
    if not isinstance(paragraphs, list) or not paragraphs:
        raise MalformedRecord("paragraphs must be a non-empty list")
    published = data.get("published")
    return Document(
        id=str(data["id"]),
        title=str(data.get("title", "")),
        published=_parse_date(published) if published else None,
        paragraphs=tuple(str(p) for p in paragraphs),
        source=str(data.get("source", "")),
    )


def load_extractions(text: str, documents: Mapping[str, Document] | None = None) -> list[ExtractedEvent]:
    """Parse an extraction document (JSON list of records) into events.

    Records: {id, doc_id, trigger_text, span: [start, end], parameters: [...],
    time?, severity?}.  Spans are checked against ``documents`` when given.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(f"not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise MalformedRecord("extraction document must be a JSON list")
    events: list[ExtractedEvent] = []
    seen: set[str] = set()
    for i, record in enumerate(data):
        if not isinstance(record, dict):
            raise MalformedRecord(f"record {i} is not an object")
        try:
            event_id = str(record["id"])
            doc_id = str(record["doc_id"])
            trigger = str(record["trigger_text"])
            span = record["span"]
        except KeyError as exc:
            raise MalformedRecord(f"record {i} missing field {exc}") from exc
        if event_id in seen:
            raise DuplicateEventId(event_id)
        seen.add(event_id)
        if (not isinstance(span, (list, tuple)) or len(span) != 2
                or not all(isinstance(v, int) and not isinstance(v, bool) for v in span)):
            raise MalformedRecord(f"record {event_id}: span must be [start, end] integers")
        start, end = span
        if start < 0 or end < start:
            raise SpanOutOfBounds(f"record {event_id}: span [{start}, {end}]")
        if documents is not None and doc_id in documents and end > len(documents[doc_id].text()):
            raise SpanOutOfBounds(f"record {event_id}: span end {end} beyond document {doc_id}")
        severity = record.get("severity")
        if severity is not None:
            if not isinstance(severity, (int, float)) or isinstance(severity, bool) or not (0.0 <= severity <= 1.0):
                raise MalformedRecord(f"record {event_id}: severity {severity!r} outside [0, 1]")
            severity = float(severity)
        time = record.get("time")
        if time is not None:
            try:
                time = _parse_date(str(time))
            except ValueError as exc:
                raise MalformedRecord(f"record {event_id}: bad time {time!r}") from exc
        parameters = record.get("parameters", [])
        if not isinstance(parameters, list):
            raise MalformedRecord(f"record {event_id}: parameters must be a list")
        emb = record.get("embedding")
        events.append(ExtractedEvent(
            id=event_id,
            doc_id=doc_id,
            trigger_text=trigger,
            sentence_span=(start, end),
            parameters=frozenset(str(p) for p in parameters),
            time=time,
            severity=severity,
            embedding=tuple(float(v) for v in emb) if emb is not None else None,
        ))
    return events


def dump_extractions(events: Sequence[ExtractedEvent]) -> str:
    records = []
    for e in events:
        record: dict = {
            "id": e.id,
            "doc_id": e.doc_id,
            "trigger_text": e.trigger_text,
            "span": list(e.sentence_span),
            "parameters": sorted(e.parameters),
        }
        if e.time is not None:
            record["time"] = e.time.isoformat()
        if e.severity is not None:
            record["severity"] = e.severity
        if e.embedding is not None:
            record["embedding"] = list(e.embedding)
        records.append(record)
    return json.dumps(records, indent=2, ensure_ascii=False) + "\n"


# --- gazetteer baseline extractor -------------------------------------------

@dataclass(frozen=True)
class GazetteerEntry:
    trigger: str
    event_type: str
    role_patterns: tuple[tuple[str, re.Pattern], ...]


def load_gazetteer(text: str) -> list[GazetteerEntry]:
    """Lines of ``trigger<TAB>event_type<TAB>role:pattern;role:pattern``."""
    entries = []
    for line_no, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise MalformedRecord(f"gazetteer line {line_no}: need trigger<TAB>event_type")
        trigger, event_type = parts[0], parts[1]
        roles: list[tuple[str, re.Pattern]] = []
        if len(parts) > 2 and parts[2].strip():
            for chunk in parts[2].split(";"):
                chunk = chunk.strip()
                if not chunk:
                    continue
                if ":" not in chunk:
                    raise MalformedRecord(f"gazetteer line {line_no}: role pattern {chunk!r} needs role:pattern")
                role, pattern = chunk.split(":", 1)
                roles.append((role.strip(), re.compile(pattern, re.IGNORECASE)))
        entries.append(GazetteerEntry(trigger=trigger, event_type=event_type, role_patterns=tuple(roles)))
    return entries


_SENTENCE_RE = re.compile(r"[^.!?\n]+[.!?]?")


def _sentences(text: str) -> list[tuple[int, int, str]]:
    out = []
    for match in _SENTENCE_RE.finditer(text):
        chunk = match.group().strip()
        if chunk:
            start = match.start() + (len(match.group()) - len(match.group().lstrip()))
            out.append((start, start + len(chunk), chunk))
    return out


def baseline_extract(doc: Document, gazetteer: Sequence[GazetteerEntry]) -> list[ExtractedEvent]:
    """One event per trigger-phrase hit; the span covers the sentence.

    Role patterns are searched in a window of the previous, same, and next
    sentence; the parameter value is the first capture group when the
    pattern has one, otherwise the whole match.
    """
    text = doc.text()
    sentences = _sentences(text)
    events: list[ExtractedEvent] = []
    counter = 0
    for idx, (start, end, sentence) in enumerate(sentences):
        lowered = sentence.lower()
        for entry in gazetteer:
            pos = lowered.find(entry.trigger.lower())
            if pos < 0:
                continue
            window = " ".join(
                sentences[j][2] for j in range(max(0, idx - 1), min(len(sentences), idx + 2))
            )
            parameters = {f"type={entry.event_type}"}
            for role, pattern in entry.role_patterns:
                match = pattern.search(window)
                if match:
                    value = match.group(1) if match.groups() else match.group(0)
                    parameters.add(f"{role}={value.strip()}")
            counter += 1
            events.append(ExtractedEvent(
                id=f"{doc.id}-e{counter}",
                doc_id=doc.id,
                trigger_text=sentence,
                sentence_span=(start, end),
                parameters=frozenset(parameters),
                time=doc.published,
            ))
    return events


# --- impact scoring ----------------------------------------------------------

def impact_score(
    events: Sequence[ExtractedEvent],
    links: Iterable[tuple[str, str]],
    *,
    centrality: str = "degree",
    clusters: CorefClusters | None = None,
    frequency_bonus: bool = False,
) -> dict[str, ImpactScore]:
    """Centrality plus magnitude per event.

    Degree centrality is degree/(n-1); the eigenvector option uses power
    iteration over the same undirected link graph.  Magnitude defaults to
    the severity field (0.5 when absent), optionally adding the log10 of
    the event's coreference-cluster size, capped at 1.0.
    """
    ids = [e.id for e in events]
    index = {eid: i for i, eid in enumerate(ids)}
    n = len(ids)
    adjacency = np.zeros((n, n), dtype=np.float64)
    for a, b in links:
        if a in index and b in index and a != b:
            adjacency[index[a], index[b]] = 1.0
            adjacency[index[b], index[a]] = 1.0

    if centrality == "eigenvector" and n > 0:
        vec = np.ones(n) / math.sqrt(n)
        for _ in range(100):
            nxt = adjacency @ vec
            norm = np.linalg.norm(nxt)
            if norm == 0:
                vec = np.zeros(n)
                break
            nxt /= norm
            if np.allclose(nxt, vec, atol=1e-12):
                vec = nxt
                break
            vec = nxt
        peak = vec.max() if n else 0.0
        central = vec / peak if peak > 0 else vec
    else:
        degrees = adjacency.sum(axis=1)
        central = degrees / (n - 1) if n > 1 else np.zeros(n)

    out: dict[str, ImpactScore] = {}
    for event in events:
        magnitude = event.severity if event.severity is not None else 0.5
        if frequency_bonus and clusters is not None:
            magnitude = min(1.0, magnitude + math.log10(len(clusters.cluster_of(event.id))))
        out[event.id] = ImpactScore(centrality=float(central[index[event.id]]), magnitude=float(magnitude))
    return out


# --- coreference clustering ---------------------------------------------------

class _UnionFind:
    def __init__(self, items: Iterable[str]) -> None:
        self.parent = {x: x for x in items}

    def find(self, x: str) -> str:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _feature_set(event: ExtractedEvent) -> frozenset[str]:
    tokens = set(normalize_name(event.trigger_text).split())
    return frozenset(tokens | set(event.parameters))


def _jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    if not a and not b:
        return 1.0
    union = len(a | b)
    return len(a & b) / union if union else 0.0


def coref_link(events: Sequence[ExtractedEvent], cfg: CorefConfig = CorefConfig()) -> CorefClusters:
    """Cluster event mentions describing the same incident.

    Two events link when the Jaccard overlap of their trigger tokens plus
    parameter values reaches param_tau, or their embeddings' cosine reaches
    embed_tau.  Clusters are the connected components of the link relation.
    """
    ids = sorted(e.id for e in events)
    uf = _UnionFind(ids)
    features = {e.id: _feature_set(e) for e in events}
    vectors: dict[str, np.ndarray] = {}
    if cfg.provider is not None or any(e.embedding is not None for e in events):
        for event in events:
            if event.embedding is not None:
                vectors[event.id] = np.asarray(event.embedding, dtype=np.float64)
            elif cfg.provider is not None:
                vectors[event.id] = embed(cfg.provider, event.text)

    links: list[tuple[str, str, float]] = []
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            jac = _jaccard(features[a], features[b])
            linked = jac >= cfg.param_tau
            strength = jac
            if not linked and a in vectors and b in vectors and vectors[a].shape == vectors[b].shape:
                cos = cosine(vectors[a], vectors[b])
                if cos >= cfg.embed_tau:
                    linked = True
                    strength = cos
            if linked:
                uf.union(a, b)
                links.append((a, b, strength))

    groups: dict[str, list[str]] = {}
    for eid in ids:
        groups.setdefault(uf.find(eid), []).append(eid)
    clusters = tuple(sorted((frozenset(members) for members in groups.values()), key=lambda c: min(c)))
    return CorefClusters(clusters=clusters, links=tuple(links))
