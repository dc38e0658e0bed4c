"""File-per-entity persistence with atomic writes.

Entities live under ``<data_dir>/<kind>/<id>.json`` wrapped in an envelope
carrying a monotonically increasing version. Writes go to a temp file in
the same directory followed by an atomic rename, so a killed process never
leaves a torn file. Re-putting an identical payload does not bump the
version. Appended kinds (submissions) get generated ids and are never
overwritten.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
import uuid
from pathlib import Path

KINDS = ("patient", "kb", "ruleset", "session", "submission", "gold", "trial_record")

_SAFE_ID = re.compile(r"[^A-Za-z0-9._-]")


class UnknownKind(ValueError):
    def __init__(self, kind: str):
        super().__init__(f"unknown entity kind {kind!r}")


class AppendOnlyViolation(RuntimeError):
    def __init__(self, kind: str, entity_id: str):
        super().__init__(f"{kind}/{entity_id} is append-only and already exists")


def _fs_name(entity_id: str) -> str:
    return _SAFE_ID.sub("_", entity_id) or "_"


class Store:
    def __init__(self, data_dir: str | Path):
        self.root = Path(data_dir)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, kind: str, entity_id: str) -> Path:
        if kind not in KINDS:
            raise UnknownKind(kind)
        return self.root / kind / f"{_fs_name(entity_id)}.json"

    def get(self, kind: str, entity_id: str) -> tuple[dict, int] | None:
        path = self._path(kind, entity_id)
        if not path.exists():
            return None
        envelope = json.loads(path.read_text(encoding="utf-8"))
        return envelope["payload"], envelope["version"]

    def put(self, kind: str, entity_id: str, payload) -> int:
        """Write an entity, returning its version. Identical payloads are
        idempotent and keep the current version."""
        existing = self.get(kind, entity_id)
        if existing is not None:
            old_payload, old_version = existing
            if old_payload == payload:
                return old_version
            version = old_version + 1
        else:
            version = 1
        self._write(kind, entity_id, payload, version)
        return version

    def append(self, kind: str, payload, entity_id: str | None = None) -> str:
        """Create a new entity that may never be overwritten."""
        entity_id = entity_id or uuid.uuid4().hex
        if self.get(kind, entity_id) is not None:
            raise AppendOnlyViolation(kind, entity_id)
        self._write(kind, entity_id, payload, 1)
        return entity_id

    def list_ids(self, kind: str) -> list[str]:
        if kind not in KINDS:
            raise UnknownKind(kind)
        directory = self.root / kind
        if not directory.exists():
            return []
        # temp files from interrupted writers start with "." and are not entities
        return sorted(p.stem for p in directory.glob("*.json") if not p.name.startswith("."))

    def list_payloads(self, kind: str) -> list[dict]:
        out = []
        for entity_id in self.list_ids(kind):
            found = self.get(kind, entity_id)
            if found is not None:
                out.append(found[0])
        return out

    def _write(self, kind: str, entity_id: str, payload, version: int) -> None:
        path = self._path(kind, entity_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        envelope = {"kind": kind, "id": entity_id, "version": version, "payload": payload}
        data = json.dumps(envelope, ensure_ascii=False, sort_keys=True, indent=2) + "\n"
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(data)
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(tmp, path)
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise
