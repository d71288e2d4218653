"""File-backed storage for schemas (versioned, lockable), extraction sets,
and pipeline runs.

One directory per schema holds immutable version snapshots plus a small
index file; every write goes through a temp file and an atomic rename so
a crash between operations never leaves a partial state.  A single lock
token (with TTL) guards edits per schema.
"""

from __future__ import annotations

import json
import logging
import os
import secrets
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from .ingest import ExtractedEvent, dump_extractions, load_extractions
from .schema import SchemaLibrary, ValidationReport, parse_sdf, serialize_sdf, validate

log = logging.getLogger(__name__)


class StoreError(RuntimeError):
    pass


class NotFound(StoreError):
    pass


class Locked(StoreError):
    def __init__(self, holder: str, expires: float):
        super().__init__(f"locked by {holder}")
        self.holder = holder
        self.expires = expires


class BadToken(StoreError):
    pass


class ValidationFailed(StoreError):
    def __init__(self, report: ValidationReport):
        codes = ", ".join(f"{e.code}@{e.ref}" for e in report.errors)
        super().__init__(f"library failed validation: {codes}")
        self.report = report


@dataclass(frozen=True)
class LockInfo:
    token: str
    holder: str
    expires: float


@dataclass(frozen=True)
class SchemaInfo:
    schema_id: str
    version: int
    lock: LockInfo | None


def _atomic_write(path: Path, data: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(data, encoding="utf-8")
    os.replace(tmp, path)


class SchemaStore:
    """Thread-safe, restart-safe store rooted at a directory."""

    def __init__(
        self,
        root: Path | str,
        lock_ttl: float = 600.0,
        clock: Callable[[], float] = time.time,
    ) -> None:
        self.root = Path(root)
        self.lock_ttl = lock_ttl
        self.clock = clock
        self._mutex = threading.RLock()
        (self.root / "schemas").mkdir(parents=True, exist_ok=True)
        (self.root / "extractions").mkdir(parents=True, exist_ok=True)
        (self.root / "runs").mkdir(parents=True, exist_ok=True)

    # -- internals ------------------------------------------------------------

    def _schema_dir(self, schema_id: str) -> Path:
        if not schema_id or "/" in schema_id or schema_id.startswith("."):
            raise NotFound(schema_id)
        return self.root / "schemas" / schema_id

    def _index_path(self, schema_id: str) -> Path:
        return self._schema_dir(schema_id) / "index.json"

    def _read_index(self, schema_id: str) -> dict:
        path = self._index_path(schema_id)
        if not path.exists():
            raise NotFound(schema_id)
        return json.loads(path.read_text(encoding="utf-8"))

    def _write_index(self, schema_id: str, index: dict) -> None:
        _atomic_write(self._index_path(schema_id), json.dumps(index, indent=2) + "\n")

    def _audit(self, action: str, schema_id: str, version: int | None, holder: str) -> None:
        record = {
            "ts": self.clock(),
            "action": action,
            "schema_id": schema_id,
            "version": version,
            "holder": holder,
        }
        path = self.root / "audit.log"
        with path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record) + "\n")

    def _live_lock(self, index: dict) -> LockInfo | None:
        lock = index.get("lock")
        if not lock:
            return None
        info = LockInfo(token=lock["token"], holder=lock["holder"], expires=lock["expires"])
        if info.expires <= self.clock():
            return None
        return info

    # -- schemas ----------------------------------------------------------------

    def create(self, schema_id: str, library: SchemaLibrary, editor: str = "") -> SchemaInfo:
        report = validate(library)
        if not report.ok:
            raise ValidationFailed(report)
        with self._mutex:
            directory = self._schema_dir(schema_id)
            if self._index_path(schema_id).exists():
                raise StoreError(f"schema {schema_id} already exists")
            directory.mkdir(parents=True, exist_ok=True)
            _atomic_write(directory / "v000001.sdf.json", serialize_sdf(library))
            index = {
                "schema_id": schema_id,
                "current_version": 1,
                "history": [{"version": 1, "timestamp": self.clock(), "editor": editor}],
                "lock": None,
            }
            self._write_index(schema_id, index)
            self._audit("create", schema_id, 1, editor)
            return SchemaInfo(schema_id=schema_id, version=1, lock=None)

    def list_schemas(self) -> list[SchemaInfo]:
        out = []
        for directory in sorted((self.root / "schemas").iterdir()):
            if (directory / "index.json").exists():
                out.append(self.info(directory.name))
        return out

    def info(self, schema_id: str) -> SchemaInfo:
        with self._mutex:
            index = self._read_index(schema_id)
            return SchemaInfo(
                schema_id=schema_id,
                version=index["current_version"],
                lock=self._live_lock(index),
            )

    def get(self, schema_id: str, version: int | None = None) -> tuple[SchemaLibrary, int]:
        with self._mutex:
            index = self._read_index(schema_id)
            target = version if version is not None else index["current_version"]
            path = self._schema_dir(schema_id) / f"v{target:06d}.sdf.json"
            if not path.exists():
                raise NotFound(f"{schema_id} version {target}")
            return parse_sdf(path.read_text(encoding="utf-8")), target

    def history(self, schema_id: str) -> list[dict]:
        with self._mutex:
            return list(self._read_index(schema_id)["history"])

    def acquire_lock(self, schema_id: str, holder: str) -> LockInfo:
        with self._mutex:
            index = self._read_index(schema_id)
            live = self._live_lock(index)
            if live is not None:
                raise Locked(live.holder, live.expires)
            info = LockInfo(token=secrets.token_hex(16), holder=holder, expires=self.clock() + self.lock_ttl)
            index["lock"] = {"token": info.token, "holder": info.holder, "expires": info.expires}
            self._write_index(schema_id, index)
            self._audit("lock", schema_id, index["current_version"], holder)
            return info

    def release_lock(self, schema_id: str, token: str) -> None:
        with self._mutex:
            index = self._read_index(schema_id)
            live = self._live_lock(index)
            if live is None or live.token != token:
                raise BadToken("token does not hold the lock")
            index["lock"] = None
            self._write_index(schema_id, index)
            self._audit("unlock", schema_id, index["current_version"], live.holder)

    def put(
        self,
        schema_id: str,
        library: SchemaLibrary,
        token: str,
        editor: str = "",
        keep_lock: bool = False,
    ) -> int:
        report = validate(library)
        if not report.ok:
            raise ValidationFailed(report)
        with self._mutex:
            index = self._read_index(schema_id)
            live = self._live_lock(index)
            if live is None or live.token != token:
                raise BadToken("token does not hold the lock")
            version = index["current_version"] + 1
            _atomic_write(self._schema_dir(schema_id) / f"v{version:06d}.sdf.json", serialize_sdf(library))
            index["current_version"] = version
            index["history"].append({"version": version, "timestamp": self.clock(), "editor": editor or live.holder})
            if not keep_lock:
                index["lock"] = None
            self._write_index(schema_id, index)
            self._audit("put", schema_id, version, editor or live.holder)
            return version

    # -- extraction sets and runs --------------------------------------------

    def save_extractions(self, events: Sequence[ExtractedEvent]) -> str:
        with self._mutex:
            extraction_id = f"ext-{secrets.token_hex(6)}"
            _atomic_write(self.root / "extractions" / f"{extraction_id}.json", dump_extractions(events))
            self._audit("extractions", extraction_id, None, "")
            return extraction_id

    def load_extraction_set(self, extraction_id: str) -> list[ExtractedEvent]:
        path = self.root / "extractions" / f"{extraction_id}.json"
        if not path.exists():
            raise NotFound(extraction_id)
        return load_extractions(path.read_text(encoding="utf-8"))

    def save_run(self, run: dict) -> str:
        with self._mutex:
            run_id = run.get("id") or f"run-{secrets.token_hex(6)}"
            run = {**run, "id": run_id}
            _atomic_write(self.root / "runs" / f"{run_id}.json", json.dumps(run, indent=2) + "\n")
            self._audit("run", run_id, None, "")
            return run_id

    def get_run(self, run_id: str) -> dict:
        path = self.root / "runs" / f"{run_id}.json"
        if not path.exists():
            raise NotFound(run_id)
        return json.loads(path.read_text(encoding="utf-8"))

    def list_runs(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "runs").glob("*.json"))
