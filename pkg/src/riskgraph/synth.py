"""Synthetic schema libraries and mask-out training data.

The mask-out protocol samples an "occurred" node set per the gate
semantics (AND: all children, OR: a nonempty subset, XOR: exactly one)
closed under precedence, reveals part of it as matched, and labels the
hidden occurred nodes positive and the non-occurred nodes negative.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .matching import InstantiatedGraph, schema_parameters
from .schema import (
    Gate,
    Participant,
    SchemaEvent,
    SchemaLibrary,
    TemporalRelation,
    id_sort_key,
    library_from,
)


class InvalidConfig(ValueError):
    pass


_WORDS = (
    "lithium", "cobalt", "nickel", "graphite", "manganese", "smelter", "port",
    "strike", "flood", "tariff", "export", "refinery", "shipment", "mine",
    "shortage", "embargo", "drought", "contract", "inspection", "recall",
)


@dataclass(frozen=True)
class MaskConfig:
    mask_fraction: float = 0.5
    count: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 <= self.mask_fraction <= 1.0):
            raise InvalidConfig(f"mask_fraction {self.mask_fraction} outside [0, 1]")
        if self.count < 1:
            raise InvalidConfig("count must be >= 1")


@dataclass(frozen=True)
class TrainingSample:
    graph: InstantiatedGraph
    labels: dict[str, int]  # unmatched node id -> 0/1
    occurred: frozenset[str]


def random_library(
    rng: random.Random,
    min_events: int = 15,
    max_events: int = 40,
    relation_prob: float = 0.35,
    max_children: int = 4,
) -> SchemaLibrary:
    """Random forest-shaped library with unique names and sibling relations.

    Temporal relations only go forward between siblings under non-XOR
    parents, so generated libraries always validate cleanly and occurrence
    sampling can respect precedence without breaking XOR gates.
    """
    target = rng.randint(min_events, max_events)
    counter = [0]

    def next_name() -> str:
        counter[0] += 1
        return f"{rng.choice(_WORDS)} {rng.choice(_WORDS)} {counter[0]}"

    events: dict[str, SchemaEvent] = {}
    root_id = "ev1"
    frontier = [root_id]
    pending: dict[str, list[str]] = {root_id: []}
    names = {root_id: next_name()}
    total = 1
    while frontier and total < target:
        parent = frontier.pop(0)
        n_children = min(rng.randint(2, max_children), target - total)
        if n_children <= 0:
            break
        children = [f"{parent}.{i + 1}" for i in range(n_children)]
        pending[parent] = children
        expanded = False
        for child in children:
            names[child] = next_name()
            pending.setdefault(child, [])
            total += 1
            if rng.random() < 0.6:
                frontier.append(child)
                expanded = True
        if not expanded and total < target:
            frontier.append(children[-1])

    relations: list[TemporalRelation] = []
    for parent, children in pending.items():
        gate = rng.choice((Gate.AND, Gate.OR, Gate.XOR)) if children else Gate.NONE
        participants = tuple(
            Participant(child_id=c, importance=rng.choice((0.25, 0.5, 0.75, 1.0)))
            for c in children
        )
        events[parent] = SchemaEvent(
            id=parent,
            name=names[parent],
            description=f"synthetic event {names[parent]}",
            participants=participants,
            gate=gate,
        )
        if gate is not Gate.XOR:
            for i in range(len(children) - 1):
                if rng.random() < relation_prob:
                    relations.append(TemporalRelation(subject=children[i], object=children[i + 1]))

    ordered = sorted(events.values(), key=lambda e: id_sort_key(e.id))
    return library_from(ordered, relations=relations, contexts=(f"synthetic-{target}",))


def sample_occurrence(lib: SchemaLibrary, rng: random.Random) -> set[str]:
    """Occurred node set: roots occur, children per gate, closed under precedence."""
    parents = lib.parent_map()
    occurred: set[str] = set()

    def expand(node: str) -> None:
        if node in occurred:
            return
        occurred.add(node)
        event = lib.events[node]
        children = [p.child_id for p in event.participants]
        if not children:
            return
        if event.gate is Gate.AND:
            chosen = children
        elif event.gate is Gate.XOR:
            chosen = [rng.choice(children)]
        else:  # OR, or NONE with children
            chosen = [c for c in children if rng.random() < 0.5]
            if not chosen:
                chosen = [rng.choice(children)]
        for child in chosen:
            expand(child)

    for root in lib.roots():
        expand(root)

    # precedence closure, skipped inside XOR sibling groups
    changed = True
    while changed:
        changed = False
        for rel in lib.relations:
            if rel.object in occurred and rel.subject not in occurred:
                parent = parents.get(rel.subject)
                if parent is not None and lib.events[parent].gate is Gate.XOR:
                    continue
                expand(rel.subject)
                changed = True
    return occurred


def generate_training_set(lib: SchemaLibrary, cfg: MaskConfig) -> list[TrainingSample]:
    """Mask-out samples: hide part of the occurred set, label hidden as positive."""
    if len(lib.events) < 3:
        raise InvalidConfig("library needs at least 3 events")
    rng = random.Random(cfg.seed)
    attributes = schema_parameters(lib)
    samples: list[TrainingSample] = []
    node_ids = sorted(lib.events, key=id_sort_key)
    for _ in range(cfg.count):
        occurred = sample_occurrence(lib, rng)
        hidden = {n for n in sorted(occurred) if rng.random() < cfg.mask_fraction}
        revealed = occurred - hidden
        graph = InstantiatedGraph(
            library=lib,
            matched={n: f"obs-{n}" for n in sorted(revealed)},
            attributes=attributes,
            extractions={},
        )
        labels = {n: (1 if n in occurred else 0) for n in node_ids if n not in revealed}
        samples.append(TrainingSample(graph=graph, labels=labels, occurred=frozenset(occurred)))
    return samples
