from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riskgraph.schema import (
    DanglingReference,
    DuplicateId,
    Gate,
    ImportanceOutOfRange,
    MalformedDocument,
    Participant,
    SchemaEvent,
    SchemaLibrary,
    TemporalRelation,
    id_sort_key,
    library_from,
    normalize_name,
    parse_sdf,
    serialize_sdf,
    validate,
)

from .conftest import tiny_library

EMPTY_DOC = '{"@context":[],"events":[],"relations":[]}'


def test_parse_empty_document():
    lib = parse_sdf(EMPTY_DOC)
    assert lib == SchemaLibrary()


def test_parse_creates_child_stubs():
    doc = {
        "@context": ["recycling"],
        "events": [
            {
                "@id": "ev1",
                "name": "lithium-ion recycling",
                "description": "",
                "participants": [
                    {"event_id": "ev1.1", "importance": 1.0},
                    {"event_id": "ev1.2", "importance": 1.0},
                    {"event_id": "ev1.3", "importance": 1.0},
                ],
                "gate": "or",
            }
        ],
        "relations": [
            {"relationSubject": "ev1.1", "relationObject": "ev1.3"},
            {"relationSubject": "ev1.2", "relationObject": "ev1.3"},
        ],
    }
    lib = parse_sdf(json.dumps(doc))
    assert len(lib.events) == 4
    assert len(lib.relations) == 2
    assert lib.events["ev1"].gate is Gate.OR
    assert lib.events["ev1.2"].name == "ev1.2"  # stub named by id


def test_parse_dangling_relation():
    doc = json.loads(EMPTY_DOC)
    doc["events"] = [{"@id": "ev1", "name": "a", "participants": [], "gate": "none"}]
    doc["relations"] = [{"relationSubject": "ev1", "relationObject": "ev9"}]
    with pytest.raises(DanglingReference, match="ev9"):
        parse_sdf(json.dumps(doc))


def test_parse_duplicate_id():
    doc = json.loads(EMPTY_DOC)
    doc["events"] = [
        {"@id": "ev1", "name": "a"},
        {"@id": "ev1", "name": "b"},
    ]
    with pytest.raises(DuplicateId):
        parse_sdf(json.dumps(doc))


def test_parse_importance_out_of_range():
    doc = json.loads(EMPTY_DOC)
    doc["events"] = [
        {"@id": "ev1", "name": "a", "participants": [{"event_id": "ev1.1", "importance": 1.5}]},
    ]
    with pytest.raises(ImportanceOutOfRange):
        parse_sdf(json.dumps(doc))


@pytest.mark.parametrize("bad", ["not json", "[]", '{"@context": []}', '{"@context": [], "events": {}, "relations": []}'])
def test_parse_malformed_document(bad):
    with pytest.raises(MalformedDocument):
        parse_sdf(bad)


def test_serialize_empty():
    assert json.loads(serialize_sdf(SchemaLibrary())) == json.loads(EMPTY_DOC)


def test_serialize_preserves_importance_literal():
    lib = tiny_library()
    assert '"importance": 0.5' in serialize_sdf(lib)


def test_roundtrip_tiny():
    lib = tiny_library()
    assert parse_sdf(serialize_sdf(lib)) == lib


def test_roundtrip_recycling(recycling):
    assert parse_sdf(serialize_sdf(recycling)) == recycling


def test_serialize_sorts_events_by_numeric_id():
    lib = library_from(
        [
            SchemaEvent(id="ev1.10", name="late"),
            SchemaEvent(id="ev1.2", name="early"),
            SchemaEvent(id="ev1", name="root", participants=(
                Participant("ev1.2", 1.0), Participant("ev1.10", 1.0))),
        ]
    )
    doc = json.loads(serialize_sdf(lib))
    assert [e["@id"] for e in doc["events"]] == ["ev1", "ev1.2", "ev1.10"]


def test_id_sort_key_ordering():
    ids = ["ev2", "ev1.10", "ev1.2", "ev1", "ev1.2.1"]
    assert sorted(ids, key=id_sort_key) == ["ev1", "ev1.2", "ev1.2.1", "ev1.10", "ev2"]


def test_normalize_name():
    assert normalize_name("  Pyro  Metallurgical ") == "pyro metallurgical"


# --- validation ---------------------------------------------------------------

def test_validate_recycling_clean(recycling):
    report = validate(recycling)
    assert report.errors == ()


def test_validate_tiny_clean():
    assert validate(tiny_library()).ok


def _mutations():
    base = tiny_library()
    events = dict(base.events)

    bad_importance = dict(events)
    bad_importance["ev1"] = SchemaEvent(
        id="ev1", name="port disruption",
        participants=(Participant("ev1.1", 1.5), Participant("ev1.2", 0.5)), gate=Gate.OR)
    yield "BAD_IMPORTANCE", SchemaLibrary(events=bad_importance, relations=base.relations)

    dangling_part = dict(events)
    dangling_part["ev1"] = SchemaEvent(
        id="ev1", name="port disruption",
        participants=(Participant("ev9", 1.0), Participant("ev1.2", 0.5)), gate=Gate.OR)
    yield "DANGLING_PARTICIPANT", SchemaLibrary(events=dangling_part, relations=())

    empty_name = dict(events)
    empty_name["ev1.1"] = SchemaEvent(id="ev1.1", name="  ")
    yield "EMPTY_NAME", SchemaLibrary(events=empty_name, relations=base.relations)

    bad_id = dict(events)
    bad_id["bogus"] = SchemaEvent(id="bogus", name="stray")
    yield "BAD_ID", SchemaLibrary(events=bad_id, relations=base.relations)

    yield "DANGLING_RELATION", SchemaLibrary(events=events, relations=(TemporalRelation("ev1.1", "ev9"),))
    yield "SELF_RELATION", SchemaLibrary(events=events, relations=(TemporalRelation("ev1.1", "ev1.1"),))
    yield "TEMPORAL_CYCLE", SchemaLibrary(
        events=events,
        relations=(TemporalRelation("ev1.1", "ev1.2"), TemporalRelation("ev1.2", "ev1.1")),
    )

    second_parent = dict(events)
    second_parent["ev2"] = SchemaEvent(id="ev2", name="other parent", participants=(Participant("ev1.1", 1.0),), gate=Gate.AND)
    yield "MULTIPLE_PARENTS", SchemaLibrary(events=second_parent, relations=base.relations)


@pytest.mark.parametrize("code,lib", list(_mutations()))
def test_validate_single_mutation_single_error(code, lib):
    report = validate(lib)
    assert len(report.errors) == 1, report.errors
    assert report.errors[0].code == code


def test_validate_two_event_hierarchy_cycle():
    lib = SchemaLibrary(events={
        "ev1": SchemaEvent(id="ev1", name="a", participants=(Participant("ev2", 1.0),), gate=Gate.AND),
        "ev2": SchemaEvent(id="ev2", name="b", participants=(Participant("ev1", 1.0),), gate=Gate.AND),
    })
    report = validate(lib)
    assert [e.code for e in report.errors] == ["CYCLE_IN_HIERARCHY"]


def test_validate_non_sibling_relation_warns_only():
    base = tiny_library()
    lib = SchemaLibrary(
        contexts=base.contexts,
        events=base.events,
        relations=(TemporalRelation("ev1", "ev1.2"),),
    )
    report = validate(lib)
    assert report.ok
    assert [w.code for w in report.warnings] == ["NON_SIBLING_RELATION"]


def test_library_from_rejects_duplicates():
    with pytest.raises(DuplicateId):
        library_from([SchemaEvent(id="ev1", name="a"), SchemaEvent(id="ev1", name="b")])


# --- property: random libraries round-trip ------------------------------------

_names = st.text(alphabet="abcdefg hij", min_size=1, max_size=12).filter(lambda s: s.strip())


@st.composite
def libraries(draw):
    n_children = draw(st.integers(min_value=0, max_value=4))
    children = [
        SchemaEvent(
            id=f"ev1.{i + 1}",
            name=draw(_names),
            description=draw(st.text(max_size=20)),
        )
        for i in range(n_children)
    ]
    participants = tuple(
        Participant(child_id=c.id, importance=draw(st.floats(min_value=0.0, max_value=1.0, allow_nan=False)))
        for c in children
    )
    gate = draw(st.sampled_from(list(Gate))) if participants else Gate.NONE
    root = SchemaEvent(id="ev1", name=draw(_names), participants=participants, gate=gate)
    relations = []
    if n_children >= 2 and draw(st.booleans()):
        relations.append(TemporalRelation(children[0].id, children[1].id))
    return library_from([root, *children], relations=relations, contexts=tuple(draw(st.lists(_names, max_size=2))))


@given(libraries())
@settings(max_examples=60, deadline=None)
def test_roundtrip_property(lib):
    assert parse_sdf(serialize_sdf(lib)) == lib
