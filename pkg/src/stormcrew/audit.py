"""Append-only audit log: newline-delimited JSON, one record per action.

Every trigger, control, publish, ingest, and failure appends exactly one
record ``{seq, ts, kind, payload}`` with strictly increasing sequence
numbers. The log is the system of record for session reconstruction: the
service can rebuild its state by replaying these records in order.
"""
from __future__ import annotations

import json
import threading
from datetime import datetime, timezone
from pathlib import Path

from .errors import SchemaError
from .model import format_rfc3339


class AuditLog:
    """Thread-safe appender with an in-memory mirror of all records.

    With ``path=None`` records are kept in memory only (tests, replays).
    Opening an existing file resumes its sequence numbering.
    """

    def __init__(self, path: str | Path | None = None) -> None:
        self._lock = threading.Lock()
        self._records: list[dict] = []
        self._path = Path(path) if path is not None else None
        self._fh = None
        if self._path is not None:
            if self._path.exists():
                self._records = read_audit(self._path)
            self._fh = open(self._path, "a")
        self._seq = self._records[-1]["seq"] if self._records else 0

    def append(self, kind: str, payload: dict, ts: datetime | None = None) -> dict:
        with self._lock:
            self._seq += 1
            record = {
                "seq": self._seq,
                "ts": format_rfc3339(ts or datetime.now(timezone.utc)),
                "kind": kind,
                "payload": payload,
            }
            self._records.append(record)
            if self._fh is not None:
                self._fh.write(json.dumps(record, sort_keys=True) + "\n")
                self._fh.flush()
            return record

    def records(self) -> list[dict]:
        with self._lock:
            return list(self._records)

    def last_seq(self) -> int:
        with self._lock:
            return self._seq

    def close(self) -> None:
        with self._lock:
            if self._fh is not None:
                self._fh.close()
                self._fh = None


def read_audit(path: str | Path) -> list[dict]:
    """Load and validate an audit file; sequence must increase by one."""
    records: list[dict] = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}:{line_no}: bad JSON: {exc}") from exc
            for key in ("seq", "ts", "kind", "payload"):
                if key not in record:
                    raise SchemaError(f"{path}:{line_no}: missing {key!r}")
            expected = (records[-1]["seq"] + 1) if records else record["seq"]
            if record["seq"] != expected:
                raise SchemaError(
                    f"{path}:{line_no}: sequence gap (got {record['seq']}, "
                    f"expected {expected})"
                )
            records.append(record)
    return records
