"""Discrete-event replay of a storm scenario under either policy arm.

The event clock advances through outage arrivals, assessment completions,
and (for the optimized arm) cadence ticks. No decision ever uses a ticket
that has not arrived yet. The optimized arm plans three-slot pipelines on
triggers and auto-publishes (headless stand-in for the operator); between
publishes a crew that finishes a job proceeds directly to the next slot
in its pipeline. The BAU arm dispatches greedily one job at a time with
no batching.

Replays are fully deterministic: all timing comes from the scenario and
the travel provider, never the wall clock. Simultaneous events resolve by
kind (arrivals, then completions, then cadence) and then by crew id.
"""
from __future__ import annotations

import heapq
import itertools
import time as _time
from dataclasses import dataclass, replace
from datetime import datetime, timedelta

from .bau import bau_assign
from .errors import InvariantError, MismatchedScenario
from .model import (
    AwcId,
    CrewState,
    GeoPoint,
    Snapshot,
    format_rfc3339,
    geo_to_doc,
    merge_duplicates,
    parse_rfc3339,
)
from .planner import PlannerConfig, freeze_first, plan_pipelines
from .scenario import Scenario
from .travel import TravelProvider, build_matrix

POLICY_BAU = "BAU"
POLICY_OPT = "Optimized"

_ARRIVAL, _COMPLETE, _CADENCE = 0, 1, 2

_MAX_EVENTS = 1_000_000


@dataclass(frozen=True)
class VisitRecord:
    """One completed assessment visit by one crew."""

    outage_id: str
    depart_time: datetime
    arrive_time: datetime
    complete_time: datetime
    from_point: GeoPoint
    to_point: GeoPoint
    assessed_customers: int

    def __post_init__(self) -> None:
        if not (self.depart_time <= self.arrive_time <= self.complete_time):
            raise InvariantError(
                f"visit to {self.outage_id}: times must be ordered "
                "depart <= arrive <= complete"
            )


@dataclass(frozen=True)
class RouteLog:
    """Ordered visit records per crew for one scenario run."""

    policy: str
    scenario_id: str
    awc: AwcId
    visits: dict[str, tuple[VisitRecord, ...]]

    def __post_init__(self) -> None:
        if self.policy not in (POLICY_BAU, POLICY_OPT):
            raise InvariantError(f"unknown policy tag {self.policy!r}")
        for crew_id, records in self.visits.items():
            for prev, cur in zip(records, records[1:]):
                if cur.depart_time < prev.complete_time:
                    raise InvariantError(
                        f"crew {crew_id}: visit to {cur.outage_id} departs before "
                        f"the previous visit completes"
                    )

    def all_visits(self) -> list[tuple[str, VisitRecord]]:
        out = []
        for crew_id in sorted(self.visits):
            out.extend((crew_id, v) for v in self.visits[crew_id])
        return out


class _SimCrew:
    __slots__ = ("id", "pos", "confirmed_at", "free", "current_job", "queue", "visits")

    def __init__(self, crew: CrewState, start: datetime):
        self.id = crew.id
        self.pos = crew.anchor
        self.confirmed_at = crew.anchor_confirmed_at or start
        self.free = True
        self.current_job: str | None = None
        self.queue: list[str] = []
        self.visits: list[VisitRecord] = []


def _normalize_policy(policy: str) -> str:
    lowered = policy.lower()
    if lowered in ("bau", "baseline"):
        return POLICY_BAU
    if lowered in ("opt", "optimized"):
        return POLICY_OPT
    raise InvariantError(f"unknown policy {policy!r} (expected 'bau' or 'opt')")


def replay(
    scenario: Scenario,
    policy: str = "opt",
    planner_cfg: PlannerConfig | None = None,
    cadence_minutes: float = 15.0,
    provider: TravelProvider | None = None,
    solve_stats: list | None = None,
) -> RouteLog:
    """Run one scenario to completion (or horizon end) under one policy.

    ``solve_stats``, when given, collects one dict per planning cycle with
    the wall-clock solve time; it is the only non-deterministic output and
    is kept out of the RouteLog itself.
    """
    tag = _normalize_policy(policy)
    if planner_cfg is None:
        planner_cfg = PlannerConfig(travel=scenario.travel)
    if cadence_minutes <= 0:
        raise InvariantError(f"cadence_minutes must be positive, got {cadence_minutes}")

    # Normalize duplicates once so both arms work the same effective
    # ticket set (the planner would merge internally anyway; the baseline
    # must not be penalized with duplicate visits).
    tickets = {t.id: t for t in merge_duplicates(scenario.tickets)}
    arrived: set[str] = set()
    done: set[str] = set()
    inflight: set[str] = set()

    crews = {c.id: _SimCrew(c, scenario.start) for c in scenario.crews}
    crew_states = {c.id: c for c in scenario.crews}
    crew_order = sorted(crews)

    heap: list[tuple[datetime, int, int, tuple]] = []
    seq = itertools.count()

    def push(when: datetime, kind: int, data: tuple) -> None:
        heapq.heappush(heap, (when, kind, next(seq), data))

    for t in tickets.values():
        push(t.created_at, _ARRIVAL, (t.id,))
    cadence = timedelta(minutes=cadence_minutes)
    if tag == POLICY_OPT:
        push(scenario.start, _CADENCE, ())

    def work_remains() -> bool:
        return len(done) < len(tickets)

    def leg_seconds(a: GeoPoint, b: GeoPoint) -> float:
        return build_matrix([a], [b], scenario.travel, provider).seconds[0][0]

    def dispatch(crew: _SimCrew, outage_id: str, now: datetime) -> None:
        ticket = tickets[outage_id]
        tau = leg_seconds(crew.pos, ticket.location)
        depart = now
        arrive = depart + timedelta(seconds=tau)
        complete = arrive + timedelta(seconds=scenario.assess.duration_s(ticket))
        crew.free = False
        crew.current_job = outage_id
        inflight.add(outage_id)
        push(complete, _COMPLETE, (crew.id, outage_id, depart, arrive, crew.pos))

    def next_from_queue(crew: _SimCrew) -> str | None:
        while crew.queue:
            outage_id = crew.queue.pop(0)
            if outage_id not in done and outage_id not in inflight:
                return outage_id
        return None

    snapshot_counter = itertools.count(1)

    def build_sim_snapshot(now: datetime) -> Snapshot:
        open_tickets = tuple(
            tickets[tid] for tid in sorted(arrived - done)
        )
        # Roster flags (availability, frozen, shift) pass through from the
        # scenario; only position, lock, and slot count reflect sim state.
        sim_crews = tuple(
            replace(
                crew_states[cid],
                anchor=crews[cid].pos,
                anchor_confirmed_at=crews[cid].confirmed_at,
                locked_to=crews[cid].current_job,
                assigned_count=0,
            )
            for cid in crew_order
        )
        return Snapshot(
            awc=scenario.awc,
            taken_at=now,
            snapshot_id=f"{scenario.scenario_id}-s{next(snapshot_counter)}",
            tickets=open_tickets,
            crews=sim_crews,
        )

    def replan(now: datetime) -> None:
        snapshot = build_sim_snapshot(now)
        started = _time.perf_counter()
        plan = plan_pipelines(snapshot, planner_cfg, provider)
        elapsed = _time.perf_counter() - started
        plan = freeze_first(plan)  # headless auto-publish
        if solve_stats is not None:
            solve_stats.append({
                "at": format_rfc3339(now),
                "snapshot_id": snapshot.snapshot_id,
                "runs_completed": plan.runs_completed,
                "solve_seconds": elapsed,
                "partial": plan.partial,
            })
        for cid in crew_order:
            crew = crews[cid]
            slots = [s.outage_id for s in plan.pipelines.get(cid, ())]
            crew.queue = [oid for oid in slots if oid != crew.current_job]
        for cid in crew_order:
            crew = crews[cid]
            if crew.free:
                nxt = next_from_queue(crew)
                if nxt is not None:
                    dispatch(crew, nxt, now)

    def crew_on_roster(cid: str) -> bool:
        state = crew_states[cid]
        return state.availability and not state.frozen and state.shift_active

    def bau_scan(now: datetime) -> None:
        for cid in crew_order:
            crew = crews[cid]
            if not crew.free or not crew_on_roster(cid):
                continue
            open_tickets = [
                tickets[tid]
                for tid in sorted(arrived - done - inflight)
            ]
            pick = bau_assign(
                replace(crew_states[cid], anchor=crew.pos,
                        anchor_confirmed_at=crew.confirmed_at),
                open_tickets,
                scenario.awc.yard,
            )
            if pick is not None:
                dispatch(crew, pick, now)

    processed = 0
    while heap:
        now = heap[0][0]
        if not scenario.run_to_completion and now > scenario.end:
            break
        batch: list[tuple[datetime, int, int, tuple]] = []
        while heap and heap[0][0] == now:
            batch.append(heapq.heappop(heap))
        processed += len(batch)
        if processed > _MAX_EVENTS:
            raise InvariantError("replay exceeded event budget; scenario does not settle")

        replan_needed = False
        completions: list[tuple] = []
        cadence_fired = False
        for _, kind, _, data in batch:
            if kind == _ARRIVAL:
                arrived.add(data[0])
            elif kind == _COMPLETE:
                completions.append(data)
            else:
                cadence_fired = True

        for crew_id, outage_id, depart, arrive_t, from_point in sorted(completions):
            crew = crews[crew_id]
            ticket = tickets[outage_id]
            crew.visits.append(VisitRecord(
                outage_id=outage_id,
                depart_time=depart,
                arrive_time=arrive_t,
                complete_time=now,
                from_point=from_point,
                to_point=ticket.location,
                assessed_customers=ticket.customers,
            ))
            inflight.discard(outage_id)
            done.add(outage_id)
            crew.pos = ticket.location
            crew.confirmed_at = now
            crew.free = True
            crew.current_job = None

        if tag == POLICY_OPT:
            for crew_id, *_ in sorted(completions):
                crew = crews[crew_id]
                if not crew.free:
                    continue  # already redispatched in this batch
                nxt = next_from_queue(crew)
                if nxt is not None:
                    dispatch(crew, nxt, now)
                else:
                    replan_needed = True  # crew-available event trigger
            if cadence_fired:
                replan_needed = True
                if work_remains():
                    nxt_tick = now + cadence
                    if scenario.run_to_completion or nxt_tick <= scenario.end:
                        push(nxt_tick, _CADENCE, ())
            if replan_needed and work_remains():
                replan(now)
        else:
            bau_scan(now)

    return RouteLog(
        policy=tag,
        scenario_id=scenario.scenario_id,
        awc=scenario.awc,
        visits={cid: tuple(crews[cid].visits) for cid in crew_order},
    )


# -- serialization -----------------------------------------------------------

def routelog_to_doc(log: RouteLog) -> dict:
    return {
        "policy": log.policy,
        "scenario_id": log.scenario_id,
        "awc": {"code": log.awc.code, "yard": geo_to_doc(log.awc.yard)},
        "visits": {
            crew_id: [
                {
                    "outage_id": v.outage_id,
                    "depart_time": format_rfc3339(v.depart_time),
                    "arrive_time": format_rfc3339(v.arrive_time),
                    "complete_time": format_rfc3339(v.complete_time),
                    "from": geo_to_doc(v.from_point),
                    "to": geo_to_doc(v.to_point),
                    "assessed_customers": v.assessed_customers,
                }
                for v in log.visits[crew_id]
            ]
            for crew_id in sorted(log.visits)
        },
    }


def routelog_from_doc(doc: dict) -> RouteLog:
    return RouteLog(
        policy=doc["policy"],
        scenario_id=doc["scenario_id"],
        awc=AwcId(
            code=doc["awc"]["code"],
            yard=GeoPoint(doc["awc"]["yard"]["lat"], doc["awc"]["yard"]["lon"]),
        ),
        visits={
            crew_id: tuple(
                VisitRecord(
                    outage_id=v["outage_id"],
                    depart_time=parse_rfc3339(v["depart_time"]),
                    arrive_time=parse_rfc3339(v["arrive_time"]),
                    complete_time=parse_rfc3339(v["complete_time"]),
                    from_point=GeoPoint(v["from"]["lat"], v["from"]["lon"]),
                    to_point=GeoPoint(v["to"]["lat"], v["to"]["lon"]),
                    assessed_customers=v["assessed_customers"],
                )
                for v in visits
            )
            for crew_id, visits in doc["visits"].items()
        },
    )


def routelog_csv_rows(log: RouteLog) -> list[list]:
    """Flat rows: crew, position, outage, arrive, complete, customers."""
    rows: list[list] = [["crew", "position", "outage", "arrive", "complete", "customers"]]
    for crew_id in sorted(log.visits):
        for pos, v in enumerate(log.visits[crew_id], start=1):
            rows.append([
                crew_id, pos, v.outage_id,
                format_rfc3339(v.arrive_time), format_rfc3339(v.complete_time),
                v.assessed_customers,
            ])
    return rows


def check_same_scenario(a: RouteLog, b: RouteLog) -> None:
    if a.scenario_id != b.scenario_id or a.awc.code != b.awc.code:
        raise MismatchedScenario(
            f"route logs cover different scenarios: {a.scenario_id!r} vs {b.scenario_id!r}"
        )
