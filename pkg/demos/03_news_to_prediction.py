#!/usr/bin/env python3
"""End-to-end disruption analysis on a news document.

Rule-based extraction pulls event mentions from the text, the matcher
binds them onto schema nodes, a GCN scores the unmatched nodes, and the
constraint engine plus argument coreference refine the result.
"""

import logging

logging.getLogger("riskgraph").setLevel(logging.ERROR)

import json
from pathlib import Path

from riskgraph import HashEmbedder, PipelineConfig, parse_hierarchy_text, run_prediction
from riskgraph.ingest import baseline_extract, coref_link, impact_score, load_document, load_gazetteer
from riskgraph.matching import MatchConfig, TextSource
from riskgraph.pipeline import prediction_report

data = Path(__file__).parent / "data"
doc = load_document(data.joinpath("cobalt_news.json").read_text(encoding="utf-8"))
gazetteer = load_gazetteer(data.joinpath("gazetteer.tsv").read_text(encoding="utf-8"))
schema = parse_hierarchy_text(data.joinpath("cobalt_disruption.txt").read_text(encoding="utf-8"))

events = baseline_extract(doc, gazetteer)
print(f"extracted {len(events)} event mentions:")
for event in events:
    print(f"  {event.id}: {event.trigger_text[:60]!r} params={sorted(event.parameters)}")

clusters = coref_link(events)
print(f"\ncoreference clusters: {[sorted(c) for c in clusters.clusters]}")
links = [(a, b) for a, b, _ in clusters.links]
impacts = impact_score(events, links)
for event_id, impact in impacts.items():
    print(f"  impact {event_id}: centrality={impact.centrality:.2f} magnitude={impact.magnitude:.2f} total={impact.total:.2f}")

provider = HashEmbedder(dimension=64)
config = PipelineConfig(
    stages="full",
    seed=42,
    epochs=120,
    threshold=0.6,  # high bar: let the constraint closure do the visible work
    match=MatchConfig(min_sim=0.25, text_source=TextSource.NAME),
)
outcome = run_prediction(schema, events, provider, config=config)

print("\nnode states after GCN + constraints + coreference:")
for node in prediction_report(outcome)["nodes"]:
    mark = {"matched": "=", "predicted": "+", "not_predicted": " "}[node["state"]]
    args = f"  args={node['inherited_arguments']}" if node["inherited_arguments"] else ""
    print(f"  [{mark}] {node['id']:10s} score={node['score']:.2f} {node['state']}{args}")

print("\napplied rules:")
for entry in prediction_report(outcome)["applied_rules"]:
    print(f"  sweep {entry['iteration']}: {entry['rule']} -> {entry['node']}")

print(f"\nconsistency ok: {outcome.consistency.ok}")
print(f"unmatched extractions: {list(outcome.match_report.unmatched)}")
