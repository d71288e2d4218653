#!/usr/bin/env python3
"""Merge two overlapping schema libraries and score a learned schema
against a gold one with the quadruple metric.

The merge folds events by normalized name (union participants, max
importance); the metric searches a one-to-one event mapping and reports
precision / recall / F over matched quadruples.
"""

import logging

logging.getLogger("riskgraph").setLevel(logging.ERROR)

from pathlib import Path

from riskgraph import (
    SchemaEvent,
    SchemaLibrary,
    decompose,
    merge,
    parse_hierarchy_text,
    score_report,
)

gold = parse_hierarchy_text(Path(__file__).parent.joinpath("data/cobalt_disruption.txt").read_text(encoding="utf-8"))

# a second, partial view of the same scenario: overlapping names, one extra event
fragment_text = """Event 1
event: cobalt supply disruption
event_id: ev1
description: xxxx
participants: production halt ev1.1_P0.5, logistics failure ev1.4_P0.75
Gate: or
Relations: xxxx

Subevent 1.1
subevent: production halt
event_id: ev1.1
description: Output stops at a major site.
participants: xxxx
Gate: xxxx
Relations: xxxx
"""
fragment = parse_hierarchy_text(fragment_text)

merged = merge([gold, fragment])
print(f"gold: {len(gold.events)} events; fragment: {len(fragment.events)}; merged: {len(merged.events)}")
root = merged.events["ev1"]
print("merged root participants (importance = max across sources):")
for part in root.participants:
    print(f"  {merged.name_of(part.child_id):22s} {part.importance}")

print(f"\nquadruples: gold {len(decompose(gold))}, merged {len(decompose(merged))}")

# degrade the gold schema to play the role of a learned schema
events = dict(gold.events)
renamed = events["ev1.2"]
events["ev1.2"] = SchemaEvent(id="ev1.2", name="shipping bottleneck", description=renamed.description,
                              participants=renamed.participants[:1], gate=renamed.gate)
learned = SchemaLibrary(contexts=gold.contexts, events=events, relations=gold.relations)

report = score_report(learned, gold)
print("\nlearned-vs-gold score:")
for key in ("precision", "recall", "fscore", "matched", "total_learned", "total_gold"):
    print(f"  {key}: {report[key]}")
print("  event mapping:", report["mapping"])
