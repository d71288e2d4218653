#!/usr/bin/env python3
"""Parse a hierarchical schema text, validate it, and round-trip it through SDF.

The block format is what an LLM emits during schema induction; the SDF
JSON document is the canonical on-disk form used by the store and service.
"""

import logging

logging.getLogger("riskgraph").setLevel(logging.ERROR)

from importlib.resources import files

from riskgraph import parse_hierarchy_text, parse_sdf, serialize_sdf, validate

text = (files("riskgraph") / "fixtures" / "lithium_recycling.txt").read_text(encoding="utf-8")

warnings: list[str] = []
library = parse_hierarchy_text(text, warnings=warnings)

print(f"parsed {len(library.events)} events, {len(library.relations)} relations")
for warning in warnings:
    print(f"  note: {warning}")

report = validate(library)
print(f"validation: {'clean' if report.ok else report.errors}")

print("\nevent tree:")
parents = library.parent_map()
for event in library.events_sorted():
    depth = library.depth_map()[event.id]
    gate = f" [{event.gate.value}]" if event.participants else ""
    print(f"{'  ' * depth}{event.id}  {event.name}{gate}")

sdf_text = serialize_sdf(library)
print(f"\nSDF serialization is {len(sdf_text)} bytes; round-trip equal:",
      parse_sdf(sdf_text) == library)
