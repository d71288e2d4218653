from __future__ import annotations

from pathlib import Path

import pytest

from riskgraph.hierarchy import parse_hierarchy_text
from riskgraph.schema import (
    Gate,
    Participant,
    SchemaEvent,
    SchemaLibrary,
    TemporalRelation,
    library_from,
)

FIXTURE_DIR = Path(__file__).parent.parent / "src" / "riskgraph" / "fixtures"
RECYCLING_TEXT = (FIXTURE_DIR / "lithium_recycling.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def recycling() -> SchemaLibrary:
    return parse_hierarchy_text(RECYCLING_TEXT)


def tiny_library() -> SchemaLibrary:
    """Two-level library handy for mutation tests."""
    return library_from(
        [
            SchemaEvent(
                id="ev1",
                name="port disruption",
                description="A port stops handling cargo.",
                participants=(
                    Participant("ev1.1", 1.0),
                    Participant("ev1.2", 0.5),
                ),
                gate=Gate.OR,
            ),
            SchemaEvent(id="ev1.1", name="crane failure"),
            SchemaEvent(id="ev1.2", name="dock strike"),
        ],
        relations=[TemporalRelation("ev1.1", "ev1.2")],
        contexts=("logistics",),
    )
