"""In-memory resource registry with an optional append-only journal.

Records are keyed by server-relative URI (a path, plus a ``?t=`` suffix
for resources derived by joining). Mutations happen under one lock and
a record is never visible without its complete entity, so concurrent
request handlers can read freely. When a journal path is configured,
every mutating operation appends one JSON line after it succeeds and
the service replays the journal at startup.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass
from typing import Iterator, Optional

from .errors import NotFound
from .values import Value, parse_json, serialize_json

COLLECTION_KINDS = ("relations", "schema", "learners", "predictors", "transformers")


@dataclass
class ResourceRecord:
    key: str
    kind: str      # service | collection | schema | relation | attribute |
                   # transformer | learner | update
    entity: object
    collection: Optional[str] = None  # which collection lists this record


class Registry:
    def __init__(self) -> None:
        self._records: dict[str, ResourceRecord] = {}
        self._collections: dict[str, list[str]] = {c: [] for c in COLLECTION_KINDS}
        self._lock = threading.RLock()

    @property
    def lock(self) -> threading.RLock:
        return self._lock

    def add(self, record: ResourceRecord) -> ResourceRecord:
        with self._lock:
            if record.key in self._records:
                raise ValueError(f"duplicate registry key {record.key!r}")
            self._records[record.key] = record
            if record.collection:
                self._collections[record.collection].append(record.key)
        return record

    def remove(self, key: str) -> None:
        with self._lock:
            record = self._records.pop(key, None)
            if record is None:
                raise NotFound(f"no resource at {key}")
            if record.collection:
                members = self._collections[record.collection]
                if key in members:
                    members.remove(key)

    def get(self, key: str) -> Optional[ResourceRecord]:
        with self._lock:
            return self._records.get(key)

    def require(self, key: str) -> ResourceRecord:
        record = self.get(key)
        if record is None:
            raise NotFound(f"no resource at {key}")
        return record

    def contains(self, key: str) -> bool:
        return self.get(key) is not None

    def members(self, collection: str) -> list[str]:
        with self._lock:
            return list(self._collections[collection])

    def records(self) -> Iterator[ResourceRecord]:
        with self._lock:
            yield from list(self._records.values())


class Journal:
    """Append-only NDJSON log of mutating operations."""

    def __init__(self, path: str):
        self._path = path
        self._lock = threading.Lock()

    def append(self, event: dict) -> None:
        line = serialize_json(event)
        with self._lock:
            with open(self._path, "a", encoding="utf-8") as f:
                f.write(line + "\n")

    def events(self) -> list[dict]:
        if not os.path.exists(self._path):
            return []
        out: list[dict] = []
        with open(self._path, encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if line:
                    event = parse_json(line)
                    assert isinstance(event, dict)
                    out.append(event)
        return out
