"""Long-running dispatch service: the operator-in-the-loop orchestrator.

One session per AWC. The loop is: ingest OMS snapshots, run the planner
on triggers (cadence, crew-available events, or manual), hold the result
as an unpublished draft, let the operator adjust controls (freeze, lock,
withhold), and publish within the staleness window T. Published plans
freeze slot 1, which becomes a hard lock in the next cycle. Any ingest or
travel-provider failure flips the session into fail-safe mode: drafts
stop, but the last published plan keeps being served unchanged.

Every state change appends one audit record; ``rebuild_session`` replays
an audit log back into session state.
"""
from __future__ import annotations

import json
import threading
import time
from collections import deque
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse

from .audit import AuditLog
from .config import ServiceConfig
from .errors import AwcMismatch, InvariantError, SchemaError, StormcrewError
from .model import Snapshot, format_rfc3339, snapshot_to_doc, validate_snapshot
from .planner import plan_pipelines, freeze_first, plan_to_doc
from .travel import ExternalRouterProvider, HaversineProvider
from .weights import weigh_all

EVENT_BUFFER = 256

MODE_NORMAL = "normal"
MODE_FAILSAFE = "failsafe"

CONTROL_OPS = ("freeze", "unfreeze", "lock", "unlock", "withhold")
TRIGGER_SOURCES = ("cadence", "crew_available_event", "manual")


class ApiError(Exception):
    """Error with a wire code and HTTP status; rendered as JSON."""

    def __init__(self, code: str, message: str, status: int) -> None:
        super().__init__(message)
        self.code = code
        self.message = message
        self.status = status


def _err(code: str, message: str, status: int) -> ApiError:
    return ApiError(code, message, status)


@dataclass
class Controls:
    """Operator control ledger; applied at the next solve, not immediately."""

    frozen: set[str] = field(default_factory=set)
    locks: dict[str, str] = field(default_factory=dict)
    unlocked: set[str] = field(default_factory=set)
    withhold: bool = False

    def to_doc(self) -> dict:
        return {
            "frozen": sorted(self.frozen),
            "locks": dict(sorted(self.locks.items())),
            "unlocked": sorted(self.unlocked),
            "withhold": self.withhold,
        }


@dataclass(frozen=True)
class SessionView:
    """Reconstructible session state (what the audit log must determine)."""

    awc_code: str
    snapshot_id: str | None
    mode: str
    controls: dict
    draft_id: str | None
    draft_doc: dict | None
    published_doc: dict | None


def frozen_slot_locks(published_doc: dict | None) -> dict[str, str]:
    """crew -> outage locks implied by frozen first slots of the last publish."""
    if not published_doc:
        return {}
    out: dict[str, str] = {}
    for crew_id, slots in published_doc.get("pipelines", {}).items():
        if slots and slots[0].get("frozen"):
            out[crew_id] = slots[0]["outage_id"]
    return out


def effective_snapshot(
    snapshot: Snapshot, controls: Controls, published_doc: dict | None
) -> Snapshot:
    """Apply the control ledger and publish-implied locks to a snapshot.

    Operator locks override publish-implied ones; an explicit unlock
    suppresses both. Locks pointing at tickets no longer in the snapshot
    (already assessed) are dropped silently.
    """
    ticket_ids = {t.id for t in snapshot.tickets}
    implied = frozen_slot_locks(published_doc)
    new_crews = []
    for crew in snapshot.crews:
        locked_to = crew.locked_to
        if crew.id in implied and crew.id not in controls.unlocked:
            locked_to = implied[crew.id]
        if crew.id in controls.locks:
            locked_to = controls.locks[crew.id]
        elif crew.id in controls.unlocked:
            locked_to = None
        if locked_to is not None and locked_to not in ticket_ids:
            locked_to = None
        new_crews.append(replace(
            crew,
            frozen=crew.frozen or crew.id in controls.frozen,
            locked_to=locked_to,
        ))
    return replace(snapshot, crews=tuple(new_crews))


class AwcSession:
    """All mutable state for one AWC, with its own locks and event stream."""

    def __init__(self, code: str, config: ServiceConfig, audit: AuditLog) -> None:
        self.code = code
        self.config = config
        self.audit = audit
        self.snapshot: Snapshot | None = None
        self.mode = MODE_NORMAL
        self.failure_reason: str | None = None
        self.controls = Controls()
        self.draft: dict | None = None  # {id, plan, doc, solved_at, solved_mono}
        self.published_doc: dict | None = None
        self.published_at: datetime | None = None
        self._draft_counter = 0
        self.solve_lock = threading.Lock()
        self.state_lock = threading.RLock()
        self.events: deque = deque(maxlen=EVENT_BUFFER)
        self.events_cond = threading.Condition()
        self._event_id = 0
        self._staleness_timer: threading.Timer | None = None
        if config.travel.router_endpoint:
            self.provider = ExternalRouterProvider(config.travel)
        else:
            self.provider = HaversineProvider(config.travel)

    # -- events ---------------------------------------------------------

    def emit(self, kind: str, payload: dict) -> None:
        with self.events_cond:
            self._event_id += 1
            self.events.append((self._event_id, kind, payload))
            self.events_cond.notify_all()

    def current_event_id(self) -> int:
        with self.events_cond:
            return self._event_id

    # -- fail-safe ------------------------------------------------------

    def _enter_failsafe(self, reason: str) -> None:
        if self.mode != MODE_FAILSAFE:
            self.mode = MODE_FAILSAFE
            self.failure_reason = reason
            self.audit.append("failsafe_entered", {"awc": self.code, "reason": reason})
            self.emit("failsafe_entered", {"reason": reason})

    def _exit_failsafe(self) -> None:
        if self.mode == MODE_FAILSAFE:
            self.mode = MODE_NORMAL
            self.failure_reason = None
            self.audit.append("failsafe_exited", {"awc": self.code})

    # -- operations -----------------------------------------------------

    def ingest(self, raw: dict) -> str:
        with self.state_lock:
            try:
                snapshot = validate_snapshot(raw, lenient=self.config.lenient_snapshots)
                if snapshot.awc.code != self.code:
                    raise AwcMismatch(
                        f"snapshot is for AWC {snapshot.awc.code!r}, "
                        f"endpoint is {self.code!r}"
                    )
                if self.snapshot is not None and snapshot.taken_at < self.snapshot.taken_at:
                    raise InvariantError(
                        "snapshot taken_at went backwards "
                        f"({format_rfc3339(snapshot.taken_at)} < "
                        f"{format_rfc3339(self.snapshot.taken_at)})"
                    )
            except (SchemaError, InvariantError, AwcMismatch) as exc:
                self.audit.append("ingest_rejected", {
                    "awc": self.code,
                    "error": type(exc).__name__,
                    "message": str(exc),
                })
                self._enter_failsafe(f"{type(exc).__name__}: {exc}")
                raise
            self.snapshot = snapshot
            self.audit.append("ingest", {
                "awc": self.code,
                "snapshot": snapshot_to_doc(snapshot),
            })
            self._exit_failsafe()
            return snapshot.snapshot_id

    def trigger(self, source: str) -> dict:
        if source not in TRIGGER_SOURCES:
            raise _err("BadSource", f"unknown trigger source {source!r}", 422)
        with self.state_lock:
            if self.mode == MODE_FAILSAFE:
                raise _err("FailsafeMode",
                           f"session is in fail-safe mode ({self.failure_reason})", 409)
            if self.snapshot is None:
                raise _err("NoSnapshot", "no snapshot ingested yet", 404)
        if not self.solve_lock.acquire(blocking=False):
            raise _err("Busy", "a solve is already in progress", 409)
        try:
            with self.state_lock:
                snapshot = self.snapshot
                controls_doc = self.controls.to_doc()
                effective = effective_snapshot(snapshot, self.controls, self.published_doc)
            started = time.perf_counter()
            if self.config.solve_delay_seconds:
                time.sleep(self.config.solve_delay_seconds)
            plan = plan_pipelines(effective, self.config.planner_config(), self.provider)
            elapsed = time.perf_counter() - started
            if plan.partial:
                self.audit.append("trigger_failed", {
                    "awc": self.code,
                    "source": source,
                    "snapshot_id": snapshot.snapshot_id,
                    "error": plan.error,
                })
                with self.state_lock:
                    self._enter_failsafe(plan.error or "travel provider failure")
                raise _err("FailsafeMode", plan.error or "travel provider failure", 409)
            with self.state_lock:
                self._draft_counter += 1
                draft_id = f"draft-{self._draft_counter}"
                solved_at = datetime.now(timezone.utc)
                doc = dict(plan_to_doc(plan))
                doc["draft_id"] = draft_id
                doc["solved_at"] = format_rfc3339(solved_at)
                self.draft = {
                    "id": draft_id,
                    "plan": plan,
                    "doc": doc,
                    "solved_at": solved_at,
                    "solved_mono": time.monotonic(),
                }
                self._arm_staleness_timer(draft_id)
                self.audit.append("trigger", {
                    "awc": self.code,
                    "source": source,
                    "snapshot_id": snapshot.snapshot_id,
                    "draft_id": draft_id,
                    "solve_seconds": round(elapsed, 6),
                    "runs_completed": plan.runs_completed,
                    "controls": controls_doc,
                    "objective_terms": self._objective_terms(effective),
                    "plan": doc,
                })
                self.emit("draft_ready", {
                    "draft_id": draft_id,
                    "snapshot_id": snapshot.snapshot_id,
                    "solved_at": doc["solved_at"],
                    "staleness_seconds": self.config.staleness_seconds,
                })
                return doc
        finally:
            self.solve_lock.release()

    def _objective_terms(self, snapshot: Snapshot) -> dict:
        weighted = weigh_all(snapshot.tickets, self.config.priority)
        return {
            "candidates": len(weighted),
            "fps_candidates": sum(1 for w in weighted if w.y),
            "total_weight": sum(w.weight for w in weighted),
            "beta_dist": self.config.beta_dist,
        }

    def _arm_staleness_timer(self, draft_id: str) -> None:
        if self._staleness_timer is not None:
            self._staleness_timer.cancel()

        def warn() -> None:
            with self.state_lock:
                if self.draft is None or self.draft["id"] != draft_id:
                    return
                age = time.monotonic() - self.draft["solved_mono"]
            self.audit.append("staleness_warning", {
                "awc": self.code, "draft_id": draft_id,
                "age_seconds": round(age, 3),
            })
            self.emit("staleness_warning", {
                "draft_id": draft_id,
                "age_seconds": round(age, 3),
            })

        timer = threading.Timer(self.config.staleness_seconds, warn)
        timer.daemon = True
        timer.start()
        self._staleness_timer = timer

    def apply_control(self, body: dict) -> dict:
        op = body.get("op")
        if op not in CONTROL_OPS:
            raise _err("BadControl", f"unknown control op {body.get('op')!r}", 422)
        with self.state_lock:
            if self.snapshot is None:
                raise _err("NoSnapshot", "no snapshot ingested yet", 404)
            crew_ids = {c.id for c in self.snapshot.crews}
            ticket_ids = {t.id for t in self.snapshot.tickets}

            if op == "withhold":
                self.controls.withhold = bool(body.get("enabled", True))
            else:
                crew = body.get("crew")
                if crew not in crew_ids:
                    raise _err("UnknownCrew", f"crew {crew!r} not in latest snapshot", 404)
                if op == "freeze":
                    self.controls.frozen.add(crew)
                elif op == "unfreeze":
                    self.controls.frozen.discard(crew)
                elif op == "unlock":
                    self.controls.locks.pop(crew, None)
                    self.controls.unlocked.add(crew)
                elif op == "lock":
                    outage = body.get("outage")
                    if outage not in ticket_ids:
                        raise _err("UnknownOutage",
                                   f"outage {outage!r} not in latest snapshot", 404)
                    holder = self._lock_holder(outage)
                    if holder is not None and holder != crew:
                        raise _err("ConflictingLock",
                                   f"outage {outage!r} already locked to {holder!r}", 409)
                    self.controls.locks[crew] = outage
                    self.controls.unlocked.discard(crew)
            record = {"awc": self.code, "op": op}
            for key in ("crew", "outage", "enabled"):
                if key in body:
                    record[key] = body[key]
            self.audit.append("control", record)
            return {"ok": True, "controls": self.controls.to_doc()}

    def _lock_holder(self, outage_id: str) -> str | None:
        for crew, target in self.controls.locks.items():
            if target == outage_id:
                return crew
        for crew, target in frozen_slot_locks(self.published_doc).items():
            if target == outage_id and crew not in self.controls.unlocked \
                    and crew not in self.controls.locks:
                return crew
        return None

    def publish(self, draft_id: str, confirm_stale: bool = False) -> dict:
        with self.state_lock:
            if self.draft is None:
                raise _err("NoDraft", "no unpublished draft", 404)
            if draft_id != self.draft["id"]:
                raise _err("NoDraft", f"draft {draft_id!r} is not current", 404)
            if self.controls.withhold:
                raise _err("Withheld", "publishing is withheld by the operator", 409)
            age = time.monotonic() - self.draft["solved_mono"]
            stale = age > self.config.staleness_seconds
            if stale and not confirm_stale:
                raise _err("StalePlan",
                           f"draft is {age:.1f}s old (T={self.config.staleness_seconds}s); "
                           "re-trigger or pass confirm_stale", 409)
            published = freeze_first(self.draft["plan"])
            self.published_at = datetime.now(timezone.utc)
            doc = dict(plan_to_doc(published))
            doc["draft_id"] = self.draft["id"]
            doc["published_at"] = format_rfc3339(self.published_at)
            doc["stale_confirmed"] = bool(stale and confirm_stale)
            notifications = [
                {"crew": crew_id, "next_outage": slots[0]["outage_id"]}
                for crew_id, slots in doc["pipelines"].items()
                if slots
            ]
            doc["notifications"] = notifications
            self.published_doc = doc
            if self._staleness_timer is not None:
                self._staleness_timer.cancel()
                self._staleness_timer = None
            self.draft = None
            self.audit.append("publish", {
                "awc": self.code,
                "draft_id": draft_id,
                "published_at": doc["published_at"],
                "stale_confirmed": doc["stale_confirmed"],
                "plan": doc,
            })
            self.emit("published", {
                "draft_id": draft_id,
                "published_at": doc["published_at"],
                "stale_confirmed": doc["stale_confirmed"],
            })
            return doc

    def staleness(self) -> dict:
        with self.state_lock:
            if self.draft is None:
                raise _err("NoDraft", "no unpublished draft", 404)
            age = time.monotonic() - self.draft["solved_mono"]
            remaining = max(0.0, self.config.staleness_seconds - age)
            return {
                "draft_id": self.draft["id"],
                "age_seconds": round(age, 3),
                "remaining_seconds": round(remaining, 3),
                "stale": age > self.config.staleness_seconds,
                "staleness_seconds": self.config.staleness_seconds,
                "mode": self.mode,
            }

    def view(self) -> SessionView:
        with self.state_lock:
            return SessionView(
                awc_code=self.code,
                snapshot_id=self.snapshot.snapshot_id if self.snapshot else None,
                mode=self.mode,
                controls=self.controls.to_doc(),
                draft_id=self.draft["id"] if self.draft else None,
                draft_doc=self.draft["doc"] if self.draft else None,
                published_doc=self.published_doc,
            )


def rebuild_session(records: list[dict], awc_code: str) -> SessionView:
    """Replay audit records into the session state they must reproduce."""
    snapshot_id: str | None = None
    mode = MODE_NORMAL
    controls = Controls()
    draft_id: str | None = None
    draft_doc: dict | None = None
    published_doc: dict | None = None
    for record in records:
        kind = record["kind"]
        payload = record["payload"]
        if payload.get("awc") not in (None, awc_code):
            continue
        if kind == "ingest":
            snapshot_id = payload["snapshot"]["snapshot_id"]
            mode = MODE_NORMAL
        elif kind == "failsafe_entered":
            mode = MODE_FAILSAFE
        elif kind == "failsafe_exited":
            mode = MODE_NORMAL
        elif kind == "control":
            op = payload["op"]
            if op == "withhold":
                controls.withhold = bool(payload.get("enabled", True))
            elif op == "freeze":
                controls.frozen.add(payload["crew"])
            elif op == "unfreeze":
                controls.frozen.discard(payload["crew"])
            elif op == "lock":
                controls.locks[payload["crew"]] = payload["outage"]
                controls.unlocked.discard(payload["crew"])
            elif op == "unlock":
                controls.locks.pop(payload["crew"], None)
                controls.unlocked.add(payload["crew"])
        elif kind == "trigger":
            draft_id = payload["draft_id"]
            draft_doc = payload["plan"]
        elif kind == "publish":
            published_doc = payload["plan"]
            draft_id = None
            draft_doc = None
    return SessionView(
        awc_code=awc_code,
        snapshot_id=snapshot_id,
        mode=mode,
        controls=controls.to_doc(),
        draft_id=draft_id,
        draft_doc=draft_doc,
        published_doc=published_doc,
    )


class DispatchState:
    """App-level state: config, audit log, and per-AWC sessions."""

    def __init__(self, config: ServiceConfig, start_timers: bool = False) -> None:
        self.config = config
        self.audit = AuditLog(config.audit_path)
        self.sessions: dict[str, AwcSession] = {}
        self._lock = threading.Lock()
        self.start_timers = start_timers
        self._cadence_threads: dict[str, threading.Thread] = {}

    def session(self, code: str, create: bool = False) -> AwcSession:
        with self._lock:
            if code not in self.sessions:
                if not create:
                    raise _err("UnknownAwc", f"no session for AWC {code!r}", 404)
                self.sessions[code] = AwcSession(code, self.config, self.audit)
                if self.start_timers:
                    self._start_cadence(code)
            return self.sessions[code]

    def _start_cadence(self, code: str) -> None:
        def loop() -> None:
            period = self.config.cadence_minutes * 60.0
            while True:
                time.sleep(period)
                try:
                    self.sessions[code].trigger("cadence")
                except (ApiError, StormcrewError):
                    pass  # busy/failsafe/no-snapshot ticks are expected

        thread = threading.Thread(target=loop, daemon=True, name=f"cadence-{code}")
        thread.start()
        self._cadence_threads[code] = thread


def _sse_format(event_id: int, kind: str, payload: dict) -> str:
    return f"id: {event_id}\nevent: {kind}\ndata: {json.dumps(payload)}\n\n"


def create_app(config: ServiceConfig | None = None, start_timers: bool = False) -> FastAPI:
    """Build the HTTP app. Endpoints are sync (threadpool) by design: the
    solve path blocks, and the per-session lock converts overlap into Busy."""
    state = DispatchState(config or ServiceConfig(), start_timers)
    app = FastAPI(title="dispatch service", docs_url=None, redoc_url=None)
    app.state.dispatch = state

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    @app.exception_handler(StormcrewError)
    async def _domain_error(request: Request, exc: StormcrewError):
        return JSONResponse(
            status_code=422,
            content={"error": {"code": type(exc).__name__, "message": str(exc)}},
        )

    def check_auth(request: Request) -> None:
        token = state.config.auth_token
        if token and request.headers.get("X-Auth-Token") != token:
            raise _err("Unauthorized", "missing or invalid X-Auth-Token", 401)

    @app.post("/v1/awcs/{awc}/snapshot")
    def post_snapshot(awc: str, body: dict, request: Request):
        check_auth(request)
        session = state.session(awc, create=True)
        snapshot_id = session.ingest(body)
        return {"snapshot_id": snapshot_id, "mode": session.mode}

    @app.get("/v1/awcs/{awc}/snapshot")
    def get_snapshot(awc: str, request: Request):
        check_auth(request)
        session = state.session(awc)
        with session.state_lock:
            if session.snapshot is None:
                raise _err("NoSnapshot", "no snapshot ingested yet", 404)
            return {
                "snapshot": snapshot_to_doc(session.snapshot),
                "mode": session.mode,
            }

    @app.post("/v1/awcs/{awc}/trigger")
    def post_trigger(awc: str, body: dict, request: Request):
        check_auth(request)
        session = state.session(awc)
        return session.trigger(body.get("source", "manual"))

    @app.post("/v1/awcs/{awc}/controls")
    def post_controls(awc: str, body: dict, request: Request):
        check_auth(request)
        session = state.session(awc)
        return session.apply_control(body)

    @app.get("/v1/awcs/{awc}/draft")
    def get_draft(awc: str, request: Request):
        check_auth(request)
        session = state.session(awc)
        with session.state_lock:
            if session.draft is None:
                raise _err("NoDraft", "no unpublished draft", 404)
            doc = dict(session.draft["doc"])
            doc["mode"] = session.mode
            return doc

    @app.post("/v1/awcs/{awc}/publish")
    def post_publish(awc: str, body: dict, request: Request):
        check_auth(request)
        session = state.session(awc)
        draft_id = body.get("draft_id")
        if not draft_id:
            raise _err("BadRequest", "draft_id is required", 422)
        return session.publish(draft_id, bool(body.get("confirm_stale", False)))

    @app.get("/v1/awcs/{awc}/plan")
    def get_plan(awc: str, request: Request):
        check_auth(request)
        session = state.session(awc)
        with session.state_lock:
            if session.published_doc is None:
                raise _err("NoPlan", "nothing published yet", 404)
            # served verbatim: fail-safe mode must not perturb these bytes
            return session.published_doc

    @app.get("/v1/awcs/{awc}/staleness")
    def get_staleness(awc: str, request: Request):
        check_auth(request)
        return state.session(awc).staleness()

    @app.get("/v1/awcs/{awc}/events")
    def get_events(
        awc: str,
        request: Request,
        replay: int = 0,
        max_events: int = 64,
        timeout_seconds: float = 30.0,
    ):
        check_auth(request)
        session = state.session(awc)
        last_id = 0 if replay else session.current_event_id()

        def stream():
            yield ": stream open\n\n"
            sent = 0
            deadline = time.monotonic() + timeout_seconds
            cursor = last_id
            while sent < max_events:
                now = time.monotonic()
                if now >= deadline:
                    break
                with session.events_cond:
                    pending = [e for e in session.events if e[0] > cursor]
                    if not pending:
                        session.events_cond.wait(timeout=min(0.5, deadline - now))
                        pending = [e for e in session.events if e[0] > cursor]
                for event_id, kind, payload in pending:
                    yield _sse_format(event_id, kind, payload)
                    cursor = event_id
                    sent += 1
                    if sent >= max_events:
                        break

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app


def run_service(config: ServiceConfig) -> None:
    """Start uvicorn with cadence timers enabled (CLI entry point)."""
    import uvicorn

    app = create_app(config, start_timers=True)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
