"""Quadruple-decomposition scoring of a learned schema against a gold one.

Both libraries are broken into quadruples (relation, event1, event2,
importance); a one-to-one event mapping is searched (exhaustive on small
inputs, seeded hill-climbing with restarts otherwise) and precision /
recall / F-score are computed over matched quadruples.
"""

from __future__ import annotations

import difflib
import random
from collections import defaultdict
from dataclasses import dataclass
from itertools import permutations
from typing import Iterable, Mapping, NamedTuple

from .schema import Gate, SchemaLibrary, id_sort_key, normalize_name

SUBEVENT = "subevent"
GATE = "gate"
BEFORE = "before"


class Quadruple(NamedTuple):
    relation: str
    event1: str
    event2: str  # event name, or the gate token for GATE quadruples
    importance: float


@dataclass(frozen=True)
class SearchConfig:
    seed: int = 0
    restarts: int = 4
    exhaustive_limit: int = 8
    importance_tol: float = 1e-9


@dataclass(frozen=True)
class EventMapping:
    mapping: Mapping[str, str]  # learned event id -> gold event id
    matched_count: int


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    fscore: float


def decompose(lib: SchemaLibrary) -> frozenset[Quadruple]:
    """Name-level quadruple set: subevents, gates, and before relations."""
    quads: set[Quadruple] = set()
    for event in lib.events.values():
        parent = normalize_name(event.name)
        for part in event.participants:
            child = normalize_name(lib.name_of(part.child_id))
            quads.add(Quadruple(SUBEVENT, parent, child, part.importance))
        if event.gate is not Gate.NONE:
            quads.add(Quadruple(GATE, parent, event.gate.value, 1.0))
    for rel in lib.relations:
        quads.add(Quadruple(
            BEFORE, normalize_name(lib.name_of(rel.subject)), normalize_name(lib.name_of(rel.object)), 1.0,
        ))
    return frozenset(quads)


def _id_quadruples(lib: SchemaLibrary) -> frozenset[Quadruple]:
    quads: set[Quadruple] = set()
    for event in lib.events.values():
        for part in event.participants:
            quads.add(Quadruple(SUBEVENT, event.id, part.child_id, part.importance))
        if event.gate is not Gate.NONE:
            quads.add(Quadruple(GATE, event.id, event.gate.value, 1.0))
    for rel in lib.relations:
        quads.add(Quadruple(BEFORE, rel.subject, rel.object, 1.0))
    return frozenset(quads)


def _matched_count(
    learned: Iterable[Quadruple],
    gold: Iterable[Quadruple],
    mapping: Mapping[str, str],
    tol: float,
) -> int:
    gold_buckets: dict[tuple[str, str, str], list[float]] = defaultdict(list)
    for quad in gold:
        gold_buckets[(quad.relation, quad.event1, quad.event2)].append(quad.importance)
    learned_buckets: dict[tuple[str, str, str], list[float]] = defaultdict(list)
    for quad in learned:
        first = mapping.get(quad.event1)
        if first is None:
            continue
        if quad.relation == GATE:
            second = quad.event2
        else:
            second = mapping.get(quad.event2)
            if second is None:
                continue
        learned_buckets[(quad.relation, first, second)].append(quad.importance)

    matched = 0
    for key, imps in learned_buckets.items():
        targets = gold_buckets.get(key)
        if not targets:
            continue
        # greedy two-pointer over sorted values is a maximum matching for
        # |a - b| <= tol pairing on a line
        a, b = sorted(imps), sorted(targets)
        i = j = 0
        while i < len(a) and j < len(b):
            if abs(a[i] - b[j]) <= tol:
                matched += 1
                i += 1
                j += 1
            elif a[i] < b[j]:
                i += 1
            else:
                j += 1
    return matched


def _exhaustive(l_ids: list[str], g_ids: list[str], ql, qg, tol: float) -> tuple[dict[str, str], int]:
    best_map: dict[str, str] = {}
    best = _matched_count(ql, qg, best_map, tol)
    if len(l_ids) <= len(g_ids):
        for image in permutations(g_ids, len(l_ids)):
            candidate = dict(zip(l_ids, image))
            count = _matched_count(ql, qg, candidate, tol)
            if count > best:
                best, best_map = count, candidate
    else:
        for domain in permutations(l_ids, len(g_ids)):
            candidate = dict(zip(domain, g_ids))
            count = _matched_count(ql, qg, candidate, tol)
            if count > best:
                best, best_map = count, candidate
    return best_map, best


def _name_seed(sl: SchemaLibrary, sgt: SchemaLibrary, l_ids: list[str], g_ids: list[str]) -> dict[str, str]:
    """Greedy highest-name-similarity pairing as a hill-climb starting point."""
    scored = []
    for lid in l_ids:
        l_name = normalize_name(sl.name_of(lid))
        for gid in g_ids:
            g_name = normalize_name(sgt.name_of(gid))
            if l_name == g_name:
                sim = 2.0
            else:
                sim = difflib.SequenceMatcher(None, l_name, g_name).ratio()
            scored.append((-sim, id_sort_key(lid), id_sort_key(gid), lid, gid))
    scored.sort()
    mapping: dict[str, str] = {}
    used: set[str] = set()
    for _, _, _, lid, gid in scored:
        if lid in mapping or gid in used:
            continue
        mapping[lid] = gid
        used.add(gid)
    return mapping


def _assign(mapping: dict[str, str], lid: str, gid: str) -> None:
    """Set mapping[lid] = gid, swapping with gid's current preimage to stay injective."""
    old = mapping.get(lid)
    other = next((k for k, v in mapping.items() if v == gid and k != lid), None)
    if other is not None:
        if old is not None:
            mapping[other] = old
        else:
            del mapping[other]
    mapping[lid] = gid


def _climb(mapping: dict[str, str], l_ids: list[str], g_ids: list[str], ql, qg, tol: float) -> tuple[dict[str, str], int]:
    """Steepest ascent over reassignments, image swaps, and quadruple alignments.

    The alignment moves set both endpoints of a learned quadruple onto a
    same-relation gold quadruple at once; without them, pairwise-coupled
    gains are invisible to single-move search and the climb stalls on
    plateaus.
    """
    current = dict(mapping)
    score = _matched_count(ql, qg, current, tol)
    pair_l = [q for q in ql if q.relation != GATE]
    pair_g = [q for q in qg if q.relation != GATE]

    def wedges(quads):
        by_anchor: dict[str, list] = defaultdict(list)
        for q in quads:
            by_anchor[q.event1].append(q)
        out = []
        for anchor, group in by_anchor.items():
            group = sorted(group)
            for i, q1 in enumerate(group):
                for q2 in group[i + 1:]:
                    out.append((anchor, q1, q2))
        return out

    wedges_l, wedges_g = wedges(pair_l), wedges(pair_g)
    use_wedges = len(wedges_l) * len(wedges_g) <= 20_000

    def compatible(lq, gq):
        return lq.relation == gq.relation and abs(lq.importance - gq.importance) <= tol

    while True:
        best_gain = 0
        best_ops: list[tuple[str, str]] | None = None
        mapped = sorted(current, key=id_sort_key)
        free = [g for g in g_ids if g not in set(current.values())]
        for lid in mapped:
            for gid in free:
                trial = dict(current)
                trial[lid] = gid
                gain = _matched_count(ql, qg, trial, tol) - score
                if gain > best_gain:
                    best_gain, best_ops = gain, [(lid, gid)]
        for i, lid_a in enumerate(mapped):
            for lid_b in mapped[i + 1:]:
                trial = dict(current)
                trial[lid_a], trial[lid_b] = current[lid_b], current[lid_a]
                gain = _matched_count(ql, qg, trial, tol) - score
                if gain > best_gain:
                    best_gain, best_ops = gain, [(lid_a, current[lid_b]), (lid_b, current[lid_a])]
        for lq in pair_l:
            for gq in pair_g:
                if not compatible(lq, gq):
                    continue
                if current.get(lq.event1) == gq.event1 and current.get(lq.event2) == gq.event2:
                    continue
                trial = dict(current)
                _assign(trial, lq.event1, gq.event1)
                _assign(trial, lq.event2, gq.event2)
                gain = _matched_count(ql, qg, trial, tol) - score
                if gain > best_gain:
                    best_gain, best_ops = gain, [(lq.event1, gq.event1), (lq.event2, gq.event2)]
        if use_wedges:
            for anchor_l, lq1, lq2 in wedges_l:
                for anchor_g, gq1, gq2 in wedges_g:
                    for first, second in (((lq1, gq1), (lq2, gq2)), ((lq1, gq2), (lq2, gq1))):
                        if not (compatible(*first) and compatible(*second)):
                            continue
                        ops = [
                            (anchor_l, anchor_g),
                            (first[0].event2, first[1].event2),
                            (second[0].event2, second[1].event2),
                        ]
                        if all(current.get(l) == g for l, g in ops):
                            continue
                        trial = dict(current)
                        for lid, gid in ops:
                            _assign(trial, lid, gid)
                        gain = _matched_count(ql, qg, trial, tol) - score
                        if gain > best_gain:
                            best_gain, best_ops = gain, ops
        if best_ops is None:
            return current, score
        for lid, gid in best_ops:
            _assign(current, lid, gid)
        score += best_gain


def best_mapping(sl: SchemaLibrary, sgt: SchemaLibrary, cfg: SearchConfig = SearchConfig()) -> EventMapping:
    """Search a one-to-one event mapping maximizing matched quadruples."""
    ql, qg = _id_quadruples(sl), _id_quadruples(sgt)
    l_ids = sorted(sl.events, key=id_sort_key)
    g_ids = sorted(sgt.events, key=id_sort_key)
    if not l_ids or not g_ids:
        return EventMapping(mapping={}, matched_count=0)

    if max(len(l_ids), len(g_ids)) <= cfg.exhaustive_limit:
        mapping, count = _exhaustive(l_ids, g_ids, ql, qg, cfg.importance_tol)
        return EventMapping(mapping=mapping, matched_count=count)

    best_map, best = _climb(_name_seed(sl, sgt, l_ids, g_ids), l_ids, g_ids, ql, qg, cfg.importance_tol)
    small, large = (l_ids, g_ids) if len(l_ids) <= len(g_ids) else (g_ids, l_ids)
    for restart in range(cfg.restarts):
        rng = random.Random(cfg.seed * 1_000_003 + restart)
        image = large[:]
        rng.shuffle(image)
        if len(l_ids) <= len(g_ids):
            seed_map = dict(zip(l_ids, image))
        else:
            domain = l_ids[:]
            rng.shuffle(domain)
            seed_map = dict(zip(domain, g_ids))
        mapping, count = _climb(seed_map, l_ids, g_ids, ql, qg, cfg.importance_tol)
        if count > best:
            best_map, best = mapping, count
    return EventMapping(mapping=best_map, matched_count=best)


def score_report(sl: SchemaLibrary, sgt: SchemaLibrary, cfg: SearchConfig = SearchConfig()) -> dict:
    """Structured report: PRF, counts, and the winning event mapping."""
    mapping = best_mapping(sl, sgt, cfg)
    total_learned = len(_id_quadruples(sl))
    total_gold = len(_id_quadruples(sgt))
    matched = mapping.matched_count
    precision = matched / total_learned if total_learned else 1.0
    recall = matched / total_gold if total_gold else 1.0
    fscore = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return {
        "precision": precision,
        "recall": recall,
        "fscore": fscore,
        "matched": matched,
        "total_learned": total_learned,
        "total_gold": total_gold,
        "mapping": {k: mapping.mapping[k] for k in sorted(mapping.mapping, key=id_sort_key)},
    }


def score(sl: SchemaLibrary, sgt: SchemaLibrary, cfg: SearchConfig = SearchConfig()) -> PRF:
    """Precision / recall / F over matched quadruples under the best mapping."""
    report = score_report(sl, sgt, cfg)
    return PRF(precision=report["precision"], recall=report["recall"], fscore=report["fscore"])
