#!/usr/bin/env python3
"""Drive the HTTP curation service in-process: create a schema, edit it
under a lock, run the analysis pipeline, and re-evaluate against gold.

The same routes back the web UI; `riskgraph serve` exposes them over a
real socket.
"""

import logging

logging.getLogger("riskgraph").setLevel(logging.ERROR)

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from riskgraph import HashEmbedder, parse_hierarchy_text, serialize_sdf
from riskgraph.service import create_app
from riskgraph.store import SchemaStore

data = Path(__file__).parent / "data"
schema = parse_hierarchy_text(data.joinpath("cobalt_disruption.txt").read_text(encoding="utf-8"))

with tempfile.TemporaryDirectory() as tmp:
    store = SchemaStore(Path(tmp) / "store")
    client = TestClient(create_app(store, provider=HashEmbedder(dimension=64)))

    created = client.post("/schemas", json={
        "schema_id": "cobalt",
        "library": json.loads(serialize_sdf(schema)),
        "editor": "demo",
    }).json()
    print("created:", created)

    lock = client.post("/schemas/cobalt/lock", json={"holder": "demo"}).json()
    print("lock token:", lock["token"][:8], "...")

    conflict = client.post("/schemas/cobalt/lock", json={"holder": "someone-else"})
    print("second lock attempt ->", conflict.status_code, conflict.json()["code"])

    payload = client.get("/schemas/cobalt").json()["library"]
    payload["events"][0]["description"] = "Edited during the demo session."
    saved = client.put("/schemas/cobalt", json={"library": payload, "token": lock["token"]}).json()
    print("saved new version:", saved)

    run = client.post("/runs", json={
        "schema_id": "cobalt",
        "document": json.loads(data.joinpath("cobalt_news.json").read_text(encoding="utf-8")),
        "gazetteer": data.joinpath("gazetteer.tsv").read_text(encoding="utf-8"),
        "config": {"stages": "full", "seed": 42, "epochs": 120,
                   "min_sim": 0.25, "text_source": "name"},
    }).json()
    states = {n["id"]: n["state"] for n in run["report"]["nodes"]}
    print("run", run["id"], "states:", states)

    evaluation = client.post("/evaluate", json={
        "learned": {"schema_id": "cobalt"},
        "gold": json.loads(serialize_sdf(schema)),
    }).json()
    print("evaluation vs original gold:",
          {k: round(v, 3) for k, v in evaluation.items() if k != "mapping"})

    print("audit trail:")
    for line in (Path(tmp) / "store" / "audit.log").read_text().splitlines():
        entry = json.loads(line)
        print(f"  {entry['action']:12s} {entry.get('schema_id', ''):8s} v{entry.get('version')}")
