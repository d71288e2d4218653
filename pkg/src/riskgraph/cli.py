"""Command-line entry points.

Subcommands: ``schema validate|merge|show``, ``induce``, ``extract``,
``predict``, ``eval``, ``serve``.  Exit codes: 0 ok, 1 usage,
2 validation failure, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .embedding import HashEmbedder, RemoteEmbedder, VectorFileEmbedder
from .hierarchy import parse_hierarchy_text
from .induction import (
    DEFAULT_TEMPLATE,
    HttpChatClient,
    ReplayChatClient,
    StubChatClient,
    induce_schema,
)
from .ingest import baseline_extract, dump_extractions, load_document, load_extractions, load_gazetteer
from .merge import merge
from .metric import SearchConfig, score_report
from .pipeline import PipelineConfig, prediction_report, run_prediction
from .schema import SchemaFormatError, SchemaLibrary, id_sort_key, parse_sdf, serialize_sdf, validate
from .store import SchemaStore

USAGE_ERROR = 1
VALIDATION_ERROR = 2
RUNTIME_ERROR = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse default exits 2
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(USAGE_ERROR)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _make_provider(config: dict):
    section = config.get("embedding", {})
    kind = section.get("provider", "hash")
    if kind == "hash":
        return HashEmbedder(dimension=int(section.get("dimension", 256)))
    if kind == "vector-file":
        return VectorFileEmbedder(path=Path(section["path"]))
    if kind == "remote":
        return RemoteEmbedder(
            endpoint=section["endpoint"],
            model=section.get("model", "default"),
            dimension=int(section["dimension"]),
            api_key_env=section.get("api_key_env", "EMBED_API_KEY"),
        )
    raise ValueError(f"unknown embedding provider {kind!r}")


def load_schema_file(path: str) -> SchemaLibrary:
    """SDF (JSON) or hierarchical block text, decided by content."""
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return parse_sdf(text)
    return parse_hierarchy_text(text)


def _print_tree(lib: SchemaLibrary) -> None:
    parents = lib.parent_map()
    children: dict[str, list[str]] = {}
    for child, parent in parents.items():
        children.setdefault(parent, []).append(child)

    def walk(node: str, indent: int) -> None:
        event = lib.events[node]
        gate = f" [{event.gate.value}]" if event.participants else ""
        print("  " * indent + f"{event.id}  {event.name}{gate}")
        for child in sorted(children.get(node, ()), key=id_sort_key):
            walk(child, indent + 1)

    for root in lib.roots():
        walk(root, 0)
    if lib.relations:
        print("relations: " + ", ".join(f"{r.subject}>{r.object}" for r in lib.relations))


def cmd_schema(args: argparse.Namespace, config: dict) -> int:
    if args.schema_cmd == "validate":
        lib = load_schema_file(args.file)
        report = validate(lib)
        for issue in report.errors:
            print(f"error {issue.code} {issue.ref}: {issue.message}")
        for issue in report.warnings:
            print(f"warning {issue.code} {issue.ref}: {issue.message}")
        if report.ok:
            print(f"ok: {len(lib.events)} events, {len(lib.relations)} relations")
            return 0
        return VALIDATION_ERROR
    if args.schema_cmd == "merge":
        libs = [load_schema_file(f) for f in args.files]
        merged = merge(libs)
        text = serialize_sdf(merged)
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
            print(f"wrote {args.output}: {len(merged.events)} events")
        else:
            print(text, end="")
        return 0
    if args.schema_cmd == "show":
        _print_tree(load_schema_file(args.file))
        return 0
    raise AssertionError(f"unknown schema subcommand {args.schema_cmd}")


def cmd_induce(args: argparse.Namespace, config: dict) -> int:
    doc = load_document(Path(args.doc).read_text(encoding="utf-8"))
    if args.replay_dir:
        client = ReplayChatClient(directory=Path(args.replay_dir))
    elif args.stub:
        client = StubChatClient(response=Path(args.stub).read_text(encoding="utf-8"))
    else:
        chat = config.get("chat", {})
        if "endpoint" not in chat:
            print("error: no chat endpoint configured and no --replay-dir/--stub given", file=sys.stderr)
            return USAGE_ERROR
        client = HttpChatClient(
            endpoint=chat["endpoint"],
            model=chat.get("model", "default"),
            timeout=float(chat.get("timeout", 60.0)),
            retries=int(chat.get("retries", 2)),
            api_key_env=chat.get("api_key_env", "CHAT_API_KEY"),
        )
    induced = induce_schema(doc, client, DEFAULT_TEMPLATE, audit_dir=args.audit_dir)
    for warning in induced.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    text = serialize_sdf(induced.library)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"wrote {args.output}: {len(induced.library.events)} events")
    else:
        print(text, end="")
    return 0


def cmd_extract(args: argparse.Namespace, config: dict) -> int:
    doc = load_document(Path(args.doc).read_text(encoding="utf-8"))
    gazetteer = load_gazetteer(Path(args.gazetteer).read_text(encoding="utf-8"))
    events = baseline_extract(doc, gazetteer)
    text = dump_extractions(events)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"wrote {args.output}: {len(events)} events")
    else:
        print(text, end="")
    return 0


def cmd_predict(args: argparse.Namespace, config: dict, seed: int) -> int:
    lib = load_schema_file(args.schema)
    events = load_extractions(Path(args.extractions).read_text(encoding="utf-8")) if args.extractions else []
    provider = _make_provider(config)
    pipeline_config = PipelineConfig(stages=args.stages, seed=seed, threshold=args.threshold)
    outcome = run_prediction(lib, events, provider, config=pipeline_config)
    report = prediction_report(outcome)
    text = json.dumps(report, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"wrote {args.output}")
    else:
        print(text, end="")
    return 0


def cmd_eval(args: argparse.Namespace, config: dict, seed: int) -> int:
    learned = load_schema_file(args.learned)
    gold = load_schema_file(args.gold)
    report = score_report(learned, gold, SearchConfig(seed=seed))
    print(json.dumps(report, indent=2))
    return 0


def cmd_serve(args: argparse.Namespace, config: dict, data_dir: str) -> int:
    import uvicorn

    from .service import create_app

    store = SchemaStore(Path(data_dir))
    ui_dir = args.ui_dir or config.get("ui_dir")
    app = create_app(store, provider=_make_provider(config), ui_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="riskgraph", description="Event-schema curation and disruption analysis")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", default=None, help="path to a JSON config file")
    parser.add_argument("--seed", type=int, default=42, help="random seed for search and training")
    parser.add_argument("--data-dir", default="./riskgraph-data", help="storage directory for serve")
    sub = parser.add_subparsers(dest="command", required=True)

    schema = sub.add_parser("schema", help="schema file operations")
    schema_sub = schema.add_subparsers(dest="schema_cmd", required=True)
    validate_p = schema_sub.add_parser("validate", help="validate a schema file")
    validate_p.add_argument("file")
    merge_p = schema_sub.add_parser("merge", help="merge schema files into one library")
    merge_p.add_argument("files", nargs="+")
    merge_p.add_argument("-o", "--output", default=None)
    show_p = schema_sub.add_parser("show", help="print a schema as a tree")
    show_p.add_argument("file")

    induce = sub.add_parser("induce", help="induce a schema from a document via a chat client")
    induce.add_argument("--doc", required=True, help="document JSON file")
    induce.add_argument("--replay-dir", default=None, help="directory of canned responses keyed by doc id")
    induce.add_argument("--stub", default=None, help="file whose content is returned verbatim")
    induce.add_argument("--audit-dir", default=None, help="where to keep unparseable raw responses")
    induce.add_argument("-o", "--output", default=None)

    extract = sub.add_parser("extract", help="rule-based event extraction from a document")
    extract.add_argument("--doc", required=True)
    extract.add_argument("--gazetteer", required=True)
    extract.add_argument("-o", "--output", default=None)

    predict = sub.add_parser("predict", help="match, score, and refine against a schema")
    predict.add_argument("--schema", required=True)
    predict.add_argument("--extractions", default=None)
    predict.add_argument("--stages", choices=("gcn_only", "constraints", "full"), default="full")
    predict.add_argument("--threshold", type=float, default=0.5)
    predict.add_argument("-o", "--output", default=None)

    evaluate = sub.add_parser("eval", help="score a learned schema against a gold schema")
    evaluate.add_argument("--learned", required=True)
    evaluate.add_argument("--gold", required=True)

    serve = sub.add_parser("serve", help="run the HTTP curation service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--ui-dir", default=None, help="static web UI directory to mount at /ui")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return USAGE_ERROR
    try:
        if args.command == "schema":
            return cmd_schema(args, config)
        if args.command == "induce":
            return cmd_induce(args, config)
        if args.command == "extract":
            return cmd_extract(args, config)
        if args.command == "predict":
            return cmd_predict(args, config, args.seed)
        if args.command == "eval":
            return cmd_eval(args, config, args.seed)
        if args.command == "serve":
            return cmd_serve(args, config, args.data_dir)
        raise AssertionError(f"unknown command {args.command}")
    except SchemaFormatError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return VALIDATION_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except Exception as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
