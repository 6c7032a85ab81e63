"""Append-only audit log: sequencing, persistence, corruption detection."""
import json
import threading

import pytest

from stormcrew.audit import AuditLog, read_audit
from stormcrew.errors import SchemaError


def test_in_memory_sequencing():
    log = AuditLog()
    r1 = log.append("trigger", {"source": "manual"})
    r2 = log.append("publish", {"draft_id": "draft-1"})
    assert (r1["seq"], r2["seq"]) == (1, 2)
    assert [r["kind"] for r in log.records()] == ["trigger", "publish"]
    assert log.last_seq() == 2


def test_file_roundtrip(tmp_path):
    path = tmp_path / "audit.ndjson"
    log = AuditLog(path)
    log.append("ingest", {"snapshot_id": "s1"})
    log.append("trigger", {"source": "cadence"})
    log.close()

    records = read_audit(path)
    assert [r["seq"] for r in records] == [1, 2]
    assert records[0]["payload"] == {"snapshot_id": "s1"}
    assert all("ts" in r for r in records)


def test_resume_continues_sequence(tmp_path):
    path = tmp_path / "audit.ndjson"
    first = AuditLog(path)
    first.append("ingest", {"n": 1})
    first.close()

    second = AuditLog(path)
    rec = second.append("trigger", {"n": 2})
    second.close()
    assert rec["seq"] == 2
    assert [r["seq"] for r in read_audit(path)] == [1, 2]


def test_gap_detected(tmp_path):
    path = tmp_path / "audit.ndjson"
    rows = [
        {"seq": 1, "ts": "2024-03-23T12:00:00Z", "kind": "a", "payload": {}},
        {"seq": 3, "ts": "2024-03-23T12:00:01Z", "kind": "b", "payload": {}},
    ]
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))
    with pytest.raises(SchemaError, match="gap"):
        read_audit(path)


def test_malformed_line_detected(tmp_path):
    path = tmp_path / "audit.ndjson"
    path.write_text('{"seq": 1, "ts": "t", "kind": "a", "payload": {}}\nnot json\n')
    with pytest.raises(SchemaError):
        read_audit(path)


def test_missing_key_detected(tmp_path):
    path = tmp_path / "audit.ndjson"
    path.write_text('{"seq": 1, "ts": "t", "payload": {}}\n')
    with pytest.raises(SchemaError):
        read_audit(path)


def test_threaded_appends_stay_sequential(tmp_path):
    path = tmp_path / "audit.ndjson"
    log = AuditLog(path)

    def worker(n):
        for _ in range(25):
            log.append("tick", {"worker": n})

    threads = [threading.Thread(target=worker, args=(i,)) for i in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    log.close()

    records = read_audit(path)
    assert [r["seq"] for r in records] == list(range(1, 101))
