"""Drive a live dispatch service through one operator session.

Starts the HTTP service on a local port, ingests a snapshot, solves a
draft, applies an operator lock, re-solves, publishes, and then shows the
fail-safe reaction to a bad snapshot. This is the same surface the
operator console uses.
Run: python3 demos/05_service_session.py
"""
import json
import socket
import threading
import time
from datetime import datetime, timezone

import requests
import uvicorn

from stormcrew import (
    AwcId,
    Category,
    CrewState,
    GeoPoint,
    OutageTicket,
    ServiceConfig,
    Snapshot,
    snapshot_to_doc,
)
from stormcrew.service import create_app

NOW = datetime(2024, 3, 23, 12, 0, tzinfo=timezone.utc)
YARD = GeoPoint(43.20, -72.40)
AWC = "DEMO"


def snapshot_doc():
    tickets = tuple(
        OutageTicket(
            id=f"r{i}", awc=AWC,
            location=GeoPoint(YARD.lat + 0.004 * i, YARD.lon),
            category=Category.FPS3 if i == 5 else Category.SINGLE,
            customers=10 * i, created_at=NOW,
        )
        for i in range(1, 6)
    ) + (OutageTicket(
        id="r-wire", awc=AWC, location=GeoPoint(YARD.lat, YARD.lon + 0.02),
        category=Category.FPS3, customers=1, created_at=NOW,
    ),)
    crews = tuple(
        CrewState(id=cid, awc=AWC, anchor=YARD, anchor_confirmed_at=NOW)
        for cid in ("alpha", "bravo")
    )
    snap = Snapshot(
        snapshot_id="shift-1", awc=AwcId(AWC, YARD), taken_at=NOW,
        tickets=tickets, crews=crews,
    )
    return snapshot_to_doc(snap)


def main():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]

    app = create_app(ServiceConfig())
    server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=port,
                                           log_level="error"))
    threading.Thread(target=server.run, daemon=True).start()
    base = f"http://127.0.0.1:{port}/v1/awcs/{AWC}"
    while not server.started:
        time.sleep(0.02)

    print("1. ingest the shift snapshot")
    r = requests.post(f"{base}/snapshot", json=snapshot_doc())
    print(f"   -> {r.json()}\n")

    print("2. trigger a solve and inspect the draft")
    draft = requests.post(f"{base}/trigger", json={"source": "manual"}).json()
    for cid, slots in sorted(draft["pipelines"].items()):
        jobs = ", ".join(s["outage_id"] for s in slots) or "(idle)"
        print(f"   {cid}: {jobs}")

    print("\n3. the operator pins bravo to the remote wire-down and re-solves")
    requests.post(f"{base}/controls", json={"op": "lock", "crew": "bravo",
                                            "outage": "r-wire"})
    draft = requests.post(f"{base}/trigger", json={"source": "manual"}).json()
    for cid, slots in sorted(draft["pipelines"].items()):
        jobs = ", ".join(s["outage_id"] for s in slots) or "(idle)"
        print(f"   {cid}: {jobs}")

    print("\n4. publish (slot 1 of every pipeline freezes)")
    pub = requests.post(f"{base}/publish", json={"draft_id": draft["draft_id"]}).json()
    print("   notifications:", json.dumps(pub["notifications"]))

    print("\n5. a corrupt snapshot arrives; the service drops to fail-safe")
    bad = dict(snapshot_doc(), snapshot_id="shift-0", taken_at="2024-03-23T11:00:00Z")
    r = requests.post(f"{base}/snapshot", json=bad)
    print(f"   ingest rejected: {r.json()['error']['code']}")
    mode = requests.get(f"{base}/snapshot").json()["mode"]
    plan = requests.get(f"{base}/plan").json()
    print(f"   mode={mode}, published plan still served "
          f"(draft {plan['draft_id']}, {len(plan['pipelines'])} crews)")

    server.should_exit = True


if __name__ == "__main__":
    main()
