"""Append-only persistence for interactive sessions.

Each session owns a meta file (creation config plus the full p-values, which
stay server-side) and a JSON-lines event log; the log is the audit trail and
replaying it through the engine reconstructs the exact state. An index file
accumulates one line per created session.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

__all__ = ["SessionMeta", "SessionStore"]


@dataclass
class SessionMeta:
    session_id: str
    config: dict
    hypotheses: list  # [{id, p, covariates}] - p stays server-side
    created_at: float = field(default_factory=time.time)

    def to_json(self) -> dict:
        return {
            "session_id": self.session_id,
            "config": self.config,
            "hypotheses": self.hypotheses,
            "created_at": self.created_at,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SessionMeta":
        return cls(
            session_id=obj["session_id"],
            config=obj["config"],
            hypotheses=obj["hypotheses"],
            created_at=obj.get("created_at", 0.0),
        )


class SessionStore:
    def __init__(self, data_dir: str | Path):
        self.root = Path(data_dir)
        self.root.mkdir(parents=True, exist_ok=True)
        self.index_path = self.root / "sessions.index.jsonl"

    def _meta_path(self, session_id: str) -> Path:
        return self.root / f"{session_id}.meta.json"

    def _log_path(self, session_id: str) -> Path:
        return self.root / f"{session_id}.log.jsonl"

    def create(self, meta: SessionMeta) -> None:
        path = self._meta_path(meta.session_id)
        if path.exists():
            raise FileExistsError(f"session {meta.session_id} already exists")
        path.write_text(json.dumps(meta.to_json()))
        self._log_path(meta.session_id).touch()
        with open(self.index_path, "a") as fh:
            fh.write(json.dumps({"session_id": meta.session_id, "created_at": meta.created_at}) + "\n")

    def exists(self, session_id: str) -> bool:
        return self._meta_path(session_id).exists()

    def load_meta(self, session_id: str) -> SessionMeta:
        return SessionMeta.from_json(json.loads(self._meta_path(session_id).read_text()))

    def append_event(self, session_id: str, event: dict) -> None:
        with open(self._log_path(session_id), "a") as fh:
            fh.write(json.dumps(event) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def load_events(self, session_id: str) -> list:
        path = self._log_path(session_id)
        if not path.exists():
            return []
        events = []
        for line in path.read_text().splitlines():
            if line.strip():
                events.append(json.loads(line))
        return events

    def raw_log(self, session_id: str) -> str:
        return self._log_path(session_id).read_text()

    def list_sessions(self) -> list:
        if not self.index_path.exists():
            return []
        out = []
        for line in self.index_path.read_text().splitlines():
            if line.strip():
                out.append(json.loads(line)["session_id"])
        return out
