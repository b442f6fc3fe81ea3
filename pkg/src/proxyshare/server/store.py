"""Storage for the relay service.

All state lives in plain dicts of wire-format records (hex strings, never
raw key material), mutated exclusively through events so the in-memory
and on-disk stores stay interchangeable:

    MemoryStore  — dict state, used by tests and demos.
    FileStore    — the same state plus a single-file append log. Every
                   event is one JSON line; a snapshot line rewrites the
                   file when enough events accumulate (compaction). A
                   truncated trailing line (crash mid-append) is dropped
                   on load.

A single re-entrant lock serializes every read and write; compound
check-then-write sequences in the service layer take the same lock, which
is what makes concurrent first-fetches of a blinded item converge on one
record.
"""

from __future__ import annotations

import copy
import json
import logging
import os
import threading
from typing import Callable, Iterator

log = logging.getLogger(__name__)

_STATE_KEYS = (
    "users",
    "content",
    "proxy_keys",
    "wraps",
    "blinding",
    "circles",
    "share_requests",
    "idempotency",
)


def _empty_state() -> dict[str, dict]:
    return {key: {} for key in _STATE_KEYS}


class MemoryStore:
    """Event-applying store over plain dicts."""

    def __init__(self) -> None:
        self.state: dict[str, dict] = _empty_state()
        self.lock = threading.RLock()

    # -- event application ------------------------------------------------

    def apply(self, event: dict) -> None:
        with self.lock:
            self._mutate(event)
            self._persist(event)

    def _mutate(self, event: dict) -> None:
        op = event["op"]
        if op == "snapshot":
            self.state = event["state"]
            return
        table, action = op.split("/")
        if table not in self.state:
            raise ValueError(f"unknown table {table!r}")
        if action == "put":
            self.state[table][event["key"]] = event["value"]
        elif action == "del":
            self.state[table].pop(event["key"], None)
        else:
            raise ValueError(f"unknown action {action!r}")

    def _persist(self, event: dict) -> None:  # overridden by FileStore
        pass

    # -- typed helpers -----------------------------------------------------

    def put(self, table: str, key: str, value: dict) -> None:
        self.apply({"op": f"{table}/put", "key": key, "value": value})

    def delete(self, table: str, key: str) -> bool:
        with self.lock:
            existed = key in self.state[table]
            if existed:
                self.apply({"op": f"{table}/del", "key": key})
            return existed

    def get(self, table: str, key: str) -> dict | None:
        with self.lock:
            value = self.state[table].get(key)
            return copy.deepcopy(value) if value is not None else None

    def values(self, table: str) -> list[dict]:
        with self.lock:
            return copy.deepcopy(list(self.state[table].values()))

    def find(self, table: str, predicate: Callable[[dict], bool]) -> Iterator[dict]:
        for value in self.values(table):
            if predicate(value):
                yield value

    def dump_state(self) -> dict:
        """Deep copy of the full state, as a snapshot would serialize it."""
        with self.lock:
            return copy.deepcopy(self.state)

    def close(self) -> None:
        pass


class FileStore(MemoryStore):
    """MemoryStore backed by a single append-only log file."""

    def __init__(self, path: str, compact_every: int = 500) -> None:
        super().__init__()
        self.path = path
        self.compact_every = compact_every
        self._events_since_snapshot = 0
        self._fh = None
        self._load()
        self._fh = open(self.path, "a", encoding="utf-8")

    def _load(self) -> None:
        if not os.path.exists(self.path):
            return
        with open(self.path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    event = json.loads(line)
                except json.JSONDecodeError:
                    # a crash mid-append leaves one torn trailing line
                    log.warning("dropping torn log line %d in %s", lineno, self.path)
                    break
                self._mutate(event)
                if event["op"] != "snapshot":
                    self._events_since_snapshot += 1

    def _persist(self, event: dict) -> None:
        self._fh.write(json.dumps(event, separators=(",", ":")) + "\n")
        self._fh.flush()
        os.fsync(self._fh.fileno())
        self._events_since_snapshot += 1
        if self._events_since_snapshot >= self.compact_every:
            self.compact()

    def compact(self) -> None:
        """Rewrite the log as one snapshot line (atomic replace)."""
        with self.lock:
            tmp = self.path + ".tmp"
            with open(tmp, "w", encoding="utf-8") as fh:
                fh.write(
                    json.dumps(
                        {"op": "snapshot", "state": self.state}, separators=(",", ":")
                    )
                    + "\n"
                )
                fh.flush()
                os.fsync(fh.fileno())
            if self._fh is not None:
                self._fh.close()
            os.replace(tmp, self.path)
            self._fh = open(self.path, "a", encoding="utf-8")
            self._events_since_snapshot = 0

    def close(self) -> None:
        with self.lock:
            if self._fh is not None:
                self._fh.close()
                self._fh = None


def open_store(path: str | None, compact_every: int = 500) -> MemoryStore:
    """Memory store when path is None/empty, file store otherwise."""
    if not path or path == ":memory:":
        return MemoryStore()
    return FileStore(path, compact_every=compact_every)
