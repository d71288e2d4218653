from __future__ import annotations

import json

import pytest

from riskgraph.cli import main
from riskgraph.schema import parse_sdf, serialize_sdf

from .conftest import RECYCLING_TEXT, tiny_library


@pytest.fixture()
def schema_file(tmp_path):
    path = tmp_path / "ports.sdf.json"
    path.write_text(serialize_sdf(tiny_library()), encoding="utf-8")
    return path


@pytest.fixture()
def recycling_file(tmp_path):
    path = tmp_path / "recycling.txt"
    path.write_text(RECYCLING_TEXT, encoding="utf-8")
    return path


def test_schema_validate_ok(schema_file, capsys):
    assert main(["schema", "validate", str(schema_file)]) == 0
    assert "ok:" in capsys.readouterr().out


def test_schema_validate_block_text(recycling_file, capsys):
    assert main(["schema", "validate", str(recycling_file)]) == 0
    out = capsys.readouterr().out
    assert "9 events" in out


def test_schema_validate_failure_exit_2(tmp_path, capsys):
    doc = json.loads(serialize_sdf(tiny_library()))
    doc["relations"].append({"relationSubject": "ev1.1", "relationObject": "ev1.1"})
    path = tmp_path / "bad.sdf.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    assert main(["schema", "validate", str(path)]) == 2
    assert "SELF_RELATION" in capsys.readouterr().out


def test_schema_malformed_exit_2(tmp_path):
    path = tmp_path / "broken.sdf.json"
    path.write_text("{not json", encoding="utf-8")
    assert main(["schema", "validate", str(path)]) == 2


def test_usage_error_exit_1(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["schema", "frobnicate", "x"])
    assert excinfo.value.code == 1


def test_missing_file_exit_1(capsys):
    assert main(["schema", "validate", "/nonexistent/file.json"]) == 1


def test_schema_merge_to_file(schema_file, recycling_file, tmp_path, capsys):
    out_path = tmp_path / "merged.sdf.json"
    code = main(["schema", "merge", str(schema_file), str(recycling_file), "-o", str(out_path)])
    assert code == 0
    merged = parse_sdf(out_path.read_text(encoding="utf-8"))
    assert len(merged.events) == 12  # 3 + 9, disjoint names


def test_schema_show_prints_tree(recycling_file, capsys):
    assert main(["schema", "show", str(recycling_file)]) == 0
    out = capsys.readouterr().out
    assert "lithium-ion recycling" in out
    assert "[or]" in out
    assert "relations:" in out


def test_induce_with_stub(tmp_path, recycling_file, capsys):
    doc_path = tmp_path / "doc.json"
    doc_path.write_text(json.dumps({"id": "d1", "paragraphs": ["some text"]}), encoding="utf-8")
    out_path = tmp_path / "induced.sdf.json"
    code = main(["induce", "--doc", str(doc_path), "--stub", str(recycling_file), "-o", str(out_path)])
    assert code == 0
    assert len(parse_sdf(out_path.read_text(encoding="utf-8")).events) == 9


def test_induce_replay_dir(tmp_path, capsys):
    doc_path = tmp_path / "doc.json"
    doc_path.write_text(json.dumps({"id": "d9", "paragraphs": ["text"]}), encoding="utf-8")
    replays = tmp_path / "replays"
    replays.mkdir()
    (replays / "d9.txt").write_text(RECYCLING_TEXT, encoding="utf-8")
    assert main(["induce", "--doc", str(doc_path), "--replay-dir", str(replays)]) == 0
    payload = capsys.readouterr().out
    assert '"ev1"' in payload


def test_induce_unconfigured_exit_1(tmp_path, capsys):
    doc_path = tmp_path / "doc.json"
    doc_path.write_text(json.dumps({"id": "d1", "paragraphs": ["x"]}), encoding="utf-8")
    assert main(["induce", "--doc", str(doc_path)]) == 1


def test_induce_garbage_exit_3(tmp_path):
    doc_path = tmp_path / "doc.json"
    doc_path.write_text(json.dumps({"id": "d1", "paragraphs": ["x"]}), encoding="utf-8")
    stub = tmp_path / "stub.txt"
    stub.write_text("complete nonsense", encoding="utf-8")
    assert main(["induce", "--doc", str(doc_path), "--stub", str(stub)]) == 3


def test_extract_and_predict_roundtrip(tmp_path, recycling_file, capsys):
    doc_path = tmp_path / "doc.json"
    doc_path.write_text(json.dumps({
        "id": "d1",
        "published": "2023-03-01",
        "paragraphs": ["The pyrometallurgical line halts this week. Bioleaching continues."],
    }), encoding="utf-8")
    gaz_path = tmp_path / "gazetteer.tsv"
    gaz_path.write_text("halts\tproduction_halt\t\n", encoding="utf-8")
    ext_path = tmp_path / "extractions.json"
    assert main(["extract", "--doc", str(doc_path), "--gazetteer", str(gaz_path), "-o", str(ext_path)]) == 0
    records = json.loads(ext_path.read_text(encoding="utf-8"))
    assert len(records) == 1

    out_path = tmp_path / "prediction.json"
    code = main([
        "--seed", "5", "predict", "--schema", str(recycling_file),
        "--extractions", str(ext_path), "--stages", "constraints", "-o", str(out_path),
    ])
    assert code == 0
    report = json.loads(out_path.read_text(encoding="utf-8"))
    assert len(report["nodes"]) == 9


def test_eval_self_score(recycling_file, capsys):
    assert main(["eval", "--learned", str(recycling_file), "--gold", str(recycling_file)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["fscore"] == 1.0


def test_config_file_round(tmp_path, recycling_file, capsys):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"embedding": {"provider": "hash", "dimension": 32}}), encoding="utf-8")
    assert main(["--config", str(config), "eval", "--learned", str(recycling_file), "--gold", str(recycling_file)]) == 0


def test_bad_config_exit_1(tmp_path, recycling_file):
    config = tmp_path / "config.json"
    config.write_text("{broken", encoding="utf-8")
    assert main(["--config", str(config), "eval", "--learned", str(recycling_file), "--gold", str(recycling_file)]) == 1
