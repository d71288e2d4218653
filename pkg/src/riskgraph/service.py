"""JSON-over-HTTP curation and analysis service.

Thin layer over SchemaStore and the pipeline; errors use structured
bodies {code, message, detail}.  When a built web UI is available its
static assets are served under /ui.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .embedding import EmbeddingProvider, HashEmbedder
from .ingest import load_document, load_extractions, baseline_extract, load_gazetteer
from .matching import MatchConfig, TextSource
from .merge import merge as merge_libraries
from .metric import SearchConfig, score_report
from .pipeline import (
    PipelineConfig,
    StageFailure,
    prediction_prf,
    prediction_report,
    run_prediction,
)
from .schema import SchemaFormatError, SchemaLibrary, parse_sdf, serialize_sdf, validate
from .store import BadToken, Locked, NotFound, SchemaStore, StoreError, ValidationFailed

log = logging.getLogger(__name__)


def _error(status: int, code: str, message: str, detail: Any = None) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message, "detail": detail})


class CreateSchemaBody(BaseModel):
    schema_id: str
    library: dict
    editor: str = ""


class PutSchemaBody(BaseModel):
    library: dict
    token: str
    editor: str = ""
    keep_lock: bool = False


class LockBody(BaseModel):
    holder: str


class MergeBody(BaseModel):
    schema_ids: list[str]
    store_as: str | None = None
    editor: str = ""


class ExtractionsBody(BaseModel):
    events: list[dict]


class RunBody(BaseModel):
    schema_id: str
    extraction_id: str | None = None
    document: dict | None = None
    gazetteer: str | None = None
    config: dict = {}


class EvaluateBody(BaseModel):
    learned: dict | str
    gold: dict | str
    seed: int = 0


def _parse_library(payload: dict | str) -> SchemaLibrary:
    text = payload if isinstance(payload, str) else json.dumps(payload)
    return parse_sdf(text)


def _library_payload(lib: SchemaLibrary) -> dict:
    return json.loads(serialize_sdf(lib))


def _pipeline_config(raw: dict) -> PipelineConfig:
    match_kwargs = {}
    if "min_sim" in raw:
        match_kwargs["min_sim"] = float(raw["min_sim"])
    if "alpha" in raw and "beta" in raw:
        match_kwargs["alpha"] = float(raw["alpha"])
        match_kwargs["beta"] = float(raw["beta"])
    if "text_source" in raw:
        match_kwargs["text_source"] = TextSource(raw["text_source"])
    kwargs: dict[str, Any] = {}
    for key in ("stages", "seed", "threshold", "epochs", "train_samples", "mask_fraction"):
        if key in raw:
            kwargs[key] = raw[key]
    if match_kwargs:
        kwargs["match"] = MatchConfig(**match_kwargs)
    return PipelineConfig(**kwargs)


def create_app(
    store: SchemaStore,
    provider: EmbeddingProvider | None = None,
    ui_dir: Path | str | None = None,
) -> FastAPI:
    provider = provider or HashEmbedder()
    app = FastAPI(title="riskgraph service")

    @app.exception_handler(NotFound)
    async def _not_found(request: Request, exc: NotFound):
        return _error(404, "NotFound", str(exc))

    @app.exception_handler(Locked)
    async def _locked(request: Request, exc: Locked):
        return _error(423, "Locked", str(exc), {"holder": exc.holder, "expires": exc.expires})

    @app.exception_handler(BadToken)
    async def _bad_token(request: Request, exc: BadToken):
        return _error(409, "BadToken", str(exc))

    @app.exception_handler(ValidationFailed)
    async def _validation_failed(request: Request, exc: ValidationFailed):
        return _error(422, "ValidationFailed", str(exc), {
            "errors": [list(issue) for issue in exc.report.errors],
            "warnings": [list(issue) for issue in exc.report.warnings],
        })

    @app.exception_handler(SchemaFormatError)
    async def _schema_format(request: Request, exc: SchemaFormatError):
        return _error(400, type(exc).__name__, str(exc))

    @app.exception_handler(StageFailure)
    async def _stage_failure(request: Request, exc: StageFailure):
        return _error(500, "StageFailure", str(exc), {"stage": exc.stage})

    @app.exception_handler(StoreError)
    async def _store_error(request: Request, exc: StoreError):
        return _error(409, "StoreError", str(exc))

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/schemas")
    def list_schemas():
        return {
            "schemas": [
                {"schema_id": info.schema_id, "version": info.version,
                 "locked_by": info.lock.holder if info.lock else None}
                for info in store.list_schemas()
            ]
        }

    @app.post("/schemas", status_code=201)
    def create_schema(body: CreateSchemaBody):
        library = _parse_library(body.library)
        info = store.create(body.schema_id, library, editor=body.editor)
        return {"schema_id": info.schema_id, "version": info.version}

    @app.get("/schemas/{schema_id}")
    def get_schema(schema_id: str, version: int | None = None):
        library, resolved = store.get(schema_id, version)
        info = store.info(schema_id)
        return {
            "schema_id": schema_id,
            "version": resolved,
            "current_version": info.version,
            "locked_by": info.lock.holder if info.lock else None,
            "library": _library_payload(library),
        }

    @app.put("/schemas/{schema_id}")
    def put_schema(schema_id: str, body: PutSchemaBody):
        library = _parse_library(body.library)
        version = store.put(schema_id, library, body.token, editor=body.editor, keep_lock=body.keep_lock)
        return {"schema_id": schema_id, "version": version}

    @app.post("/schemas/{schema_id}/lock")
    def lock_schema(schema_id: str, body: LockBody):
        info = store.acquire_lock(schema_id, body.holder)
        return {"token": info.token, "holder": info.holder, "expires": info.expires}

    @app.delete("/schemas/{schema_id}/lock")
    def unlock_schema(schema_id: str, token: str):
        store.release_lock(schema_id, token)
        return {"released": True}

    @app.post("/schemas/merge")
    def merge_schemas(body: MergeBody):
        libraries = [store.get(sid)[0] for sid in body.schema_ids]
        merged = merge_libraries(libraries)
        response: dict[str, Any] = {"library": _library_payload(merged)}
        if body.store_as:
            info = store.create(body.store_as, merged, editor=body.editor)
            response.update({"schema_id": info.schema_id, "version": info.version})
        return response

    @app.post("/schemas/{schema_id}/validate")
    def validate_schema(schema_id: str, version: int | None = None):
        library, resolved = store.get(schema_id, version)
        report = validate(library)
        return {
            "schema_id": schema_id,
            "version": resolved,
            "ok": report.ok,
            "errors": [list(issue) for issue in report.errors],
            "warnings": [list(issue) for issue in report.warnings],
        }

    @app.post("/extractions", status_code=201)
    def post_extractions(body: ExtractionsBody):
        events = load_extractions(json.dumps(body.events))
        extraction_id = store.save_extractions(events)
        return {"extraction_id": extraction_id, "count": len(events)}

    @app.post("/runs", status_code=201)
    def post_run(body: RunBody):
        library, version = store.get(body.schema_id)
        config = _pipeline_config(body.config)
        if body.extraction_id:
            events = store.load_extraction_set(body.extraction_id)
            extraction_id = body.extraction_id
        elif body.document is not None:
            doc = load_document(body.document)
            gazetteer = load_gazetteer(body.gazetteer or "")
            events = baseline_extract(doc, gazetteer)
            extraction_id = store.save_extractions(events) if events else None
        else:
            events = []
            extraction_id = None
        outcome = run_prediction(library, events, provider, config=config)
        report = prediction_report(outcome)
        run: dict[str, Any] = {
            "schema_id": body.schema_id,
            "schema_version": version,
            "extraction_id": extraction_id,
            "config": {"stages": config.stages, "seed": config.seed, "threshold": config.threshold},
            "report": report,
        }
        gold = body.config.get("gold")
        if gold is not None:
            eligible = [n for n in library.events if not outcome.graph.is_matched(n)]
            prf = prediction_prf(outcome.result, set(gold), eligible)
            run["prf"] = {"precision": prf.precision, "recall": prf.recall, "fscore": prf.fscore}
        run_id = store.save_run(run)
        return store.get_run(run_id)

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        return store.get_run(run_id)

    @app.post("/evaluate")
    def evaluate(body: EvaluateBody):
        def resolve(value: dict | str) -> SchemaLibrary:
            if isinstance(value, dict) and "schema_id" in value and "events" not in value:
                return store.get(str(value["schema_id"]))[0]
            return _parse_library(value)

        learned = resolve(body.learned)
        gold = resolve(body.gold)
        return score_report(learned, gold, SearchConfig(seed=body.seed))

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
