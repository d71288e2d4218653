from __future__ import annotations

import pytest

from riskgraph.hierarchy import (
    BadImportanceSuffix,
    BadRelationSyntax,
    MalformedBlock,
    parse_hierarchy_text,
)
from riskgraph.schema import Gate, dotted_parent, is_event_id, validate

from .conftest import RECYCLING_TEXT


def test_recycling_fixture_structure(recycling):
    assert len(recycling.events) == 9  # 1 main + 3 subevents + 5 stubs
    assert recycling.events["ev1"].gate is Gate.OR
    assert recycling.events["ev1.1"].gate is Gate.AND
    assert {(r.subject, r.object) for r in recycling.relations} == {
        ("ev1.1", "ev1.3"),
        ("ev1.2", "ev1.3"),
        ("ev1.1.1", "ev1.1.2"),
        ("ev1.1.1", "ev1.1.3"),
        ("ev1.1.1", "ev1.1.4"),
        ("ev1.1.1", "ev1.1.5"),
    }


def test_recycling_participants(recycling):
    root = recycling.events["ev1"]
    assert [(p.child_id, p.importance) for p in root.participants] == [
        ("ev1.1", 1.0), ("ev1.2", 1.0), ("ev1.3", 1.0),
    ]
    pyro = recycling.events["ev1.1"]
    assert len(pyro.participants) == 5
    assert sorted(p.importance for p in pyro.participants) == [0.5, 0.5, 0.5, 0.5, 1.0]


def test_recycling_stub_names(recycling):
    assert recycling.events["ev1.1.1"].name == "metal oxides"
    assert recycling.events["ev1.1.5"].name == "nickel alloys"
    assert recycling.events["ev1.1.2"].description == ""


def test_fixture_parses_without_errors_and_validates():
    warnings: list[str] = []
    lib = parse_hierarchy_text(RECYCLING_TEXT, warnings=warnings)
    assert validate(lib).errors == ()
    # only stub-creation warnings
    assert all("stub" in w for w in warnings)


def test_placeholder_fields_are_empty():
    text = """Event 1
event: export ban
event_id: ev1
description: xxxx
participants: xxxx
Gate: xxxx
Relations: xxxx
"""
    lib = parse_hierarchy_text(text)
    event = lib.events["ev1"]
    assert event.description == ""
    assert event.participants == ()
    assert event.gate is Gate.NONE
    assert lib.relations == ()


def test_importance_out_of_range_raises():
    text = """Event 1
event: a
event_id: ev1
participants: foo ev2.1_P1.5
"""
    with pytest.raises(BadImportanceSuffix):
        parse_hierarchy_text(text)


def test_missing_importance_suffix_raises():
    text = """Event 1
event: a
event_id: ev1
participants: cobalt ev1.1
"""
    with pytest.raises(BadImportanceSuffix):
        parse_hierarchy_text(text)


def test_bad_relation_syntax():
    text = """Event 1
event: a
event_id: ev1
Relations: ev1.1<ev1.2
"""
    with pytest.raises(BadRelationSyntax):
        parse_hierarchy_text(text)


def test_missing_event_id_is_malformed():
    text = """Event 1
event: a
description: something
"""
    with pytest.raises(MalformedBlock):
        parse_hierarchy_text(text)


def test_duplicate_event_id_is_malformed():
    text = """Event 1
event: a
event_id: ev1

Event 2
event: b
event_id: ev1
"""
    with pytest.raises(MalformedBlock):
        parse_hierarchy_text(text)


def test_unknown_lines_skipped_with_warnings():
    text = """Here is the structure you asked for:
Event 1
event: a
event_id: ev1
"""
    warnings: list[str] = []
    lib = parse_hierarchy_text(text, warnings=warnings)
    assert "ev1" in lib.events
    assert any("unrecognized" in w for w in warnings)


def test_unknown_gate_token_warns_and_maps_to_none():
    text = """Event 1
event: a
event_id: ev1
participants: b ev1.1_P1
Gate: MAYBE
"""
    warnings: list[str] = []
    lib = parse_hierarchy_text(text, warnings=warnings)
    assert lib.events["ev1"].gate is Gate.NONE
    assert any("gate" in w for w in warnings)


def test_gate_tokens_case_insensitive():
    text = """Event 1
event: a
event_id: ev1
participants: b ev1.1_P1
Gate: AND
"""
    assert parse_hierarchy_text(text).events["ev1"].gate is Gate.AND


def test_placeholder_name_falls_back_to_id():
    text = """Event 1
event: xxxx
event_id: ev1
"""
    warnings: list[str] = []
    lib = parse_hierarchy_text(text, warnings=warnings)
    assert lib.events["ev1"].name == "ev1"
    assert validate(lib).errors == ()


def test_relation_to_unknown_id_dropped_with_warning():
    text = """Event 1
event: a
event_id: ev1
Relations: ev1>ev9
"""
    warnings: list[str] = []
    lib = parse_hierarchy_text(text, warnings=warnings)
    assert lib.relations == ()
    assert any("ev9" in w for w in warnings)


def test_crlf_accepted():
    text = RECYCLING_TEXT.replace("\n", "\r\n")
    lib = parse_hierarchy_text(text)
    assert len(lib.events) == 9


def test_id_grammar_and_parent_prefix(recycling):
    parents = recycling.parent_map()
    for event_id in recycling.events:
        assert is_event_id(event_id)
        prefix = dotted_parent(event_id)
        if prefix is not None and prefix in recycling.events:
            assert parents[event_id] == prefix
