"""Rolling three-slot pipeline planning.

One planning cycle runs the matcher up to ``k_max`` times against a fixed
snapshot. After each run the assigned outages leave the candidate queue
and each assigned crew's planning anchor moves to its new outage, so run
k+1 prices travel from where crews will be, not where they started. The
result is an ordered pipeline of up to three outages per crew; slot 1 is
frozen at publish time and converts to a hard lock in the next cycle.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import datetime

from .errors import (
    InfeasibleLocks,
    InvariantError,
    MatrixMiss,
    MissingTau,
    RouterUnavailable,
    StaleRun,
)
from .model import (
    MAX_ASSIGNED_PER_CREW,
    GeoPoint,
    Snapshot,
    format_rfc3339,
    merge_duplicates,
    parse_rfc3339,
)
from .solver import Assignment, profit_matrix, solve_assignment
from .travel import TravelConfig, TravelProvider, build_matrix, robustify
from .weights import PriorityConfig, WeightedOutage, weigh_all


@dataclass(frozen=True)
class PlannerConfig:
    """Everything one planning cycle needs besides the snapshot itself."""

    priority: PriorityConfig = field(default_factory=PriorityConfig)
    travel: TravelConfig = field(default_factory=TravelConfig)
    beta_dist: float = 1.0
    force_full: bool = True
    k_max: int = 3

    def __post_init__(self) -> None:
        if self.beta_dist <= 0:
            raise InvariantError(f"beta_dist must be positive, got {self.beta_dist}")
        if self.k_max < 1:
            raise InvariantError(f"k_max must be >= 1, got {self.k_max}")


@dataclass(frozen=True)
class PlannerState:
    """Mutable-between-runs planning state, carried immutably.

    ``candidate_ids`` is the outage queue in (created_at, id) order;
    ``anchors`` are the travel origins for the NEXT run; ``anchor_ages_s``
    is nonzero only for anchors still at their reported snapshot position.
    """

    run_index: int
    candidate_ids: tuple[str, ...]
    anchors: dict[str, GeoPoint]
    assigned_counts: dict[str, int]
    anchor_ages_s: dict[str, float]


@dataclass(frozen=True)
class PlanSlot:
    outage_id: str
    frozen: bool
    rationale: str


@dataclass(frozen=True)
class PlanPipelines:
    """Per-crew ordered job pipelines produced by one planning cycle."""

    snapshot_id: str
    created_at: datetime
    pipelines: dict[str, tuple[PlanSlot, ...]]
    runs_completed: int
    partial: bool = False
    error: str | None = None

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for crew_id, slots in self.pipelines.items():
            for slot in slots:
                if slot.outage_id in seen:
                    raise InvariantError(
                        f"outage {slot.outage_id} appears twice in plan "
                        f"(second time under crew {crew_id})"
                    )
                seen.add(slot.outage_id)

    def assigned_outages(self) -> set[str]:
        return {slot.outage_id for slots in self.pipelines.values() for slot in slots}


def _fmt(value: float) -> str:
    text = f"{value:.2f}".rstrip("0").rstrip(".")
    return text if text not in ("", "-") else "0"


def _eligible_for_run(snapshot: Snapshot, counts: dict[str, int], k_max: int) -> list[str]:
    # Per-run eligibility: snapshot flags plus this cycle's running slot
    # count. The hard per-crew cap stays at 3 even if k_max is raised.
    cap = min(MAX_ASSIGNED_PER_CREW, k_max)
    out = []
    for crew in snapshot.crews:
        if not (crew.availability and not crew.frozen and crew.shift_active):
            continue
        if counts.get(crew.id, 0) >= cap:
            continue
        out.append(crew.id)
    return sorted(out)


def _lock_pairs(snapshot: Snapshot, survivor_of: dict[str, str], eligible: list[str]) -> set[tuple[str, str]]:
    """Run-1 hard locks from crew.locked_to, remapped across merges.

    A lock held by an ineligible crew (operator froze it mid-job) releases
    the ticket back to the pool rather than stranding it.
    """
    eligible_set = set(eligible)
    locks: set[tuple[str, str]] = set()
    for crew in snapshot.crews:
        if crew.locked_to is None or crew.id not in eligible_set:
            continue
        target = survivor_of.get(crew.locked_to, crew.locked_to)
        locks.add((crew.id, target))
    return locks


def apply_run(state: PlannerState, asg: Assignment) -> PlannerState:
    """Advance planner state by one completed run.

    Assigned outages leave the queue; each assigned crew re-anchors to its
    outage (ages reset to zero since the new anchor is a planned position,
    not a stale report); unassigned crews keep anchor and age.
    """
    if asg.run_index != state.run_index:
        raise StaleRun(
            f"assignment is for run {asg.run_index}, state expects {state.run_index}"
        )
    assigned_outages = {o for _, o in asg.pairs}
    anchors = dict(state.anchors)
    ages = dict(state.anchor_ages_s)
    counts = dict(state.assigned_counts)
    return PlannerState(
        run_index=state.run_index + 1,
        candidate_ids=tuple(o for o in state.candidate_ids if o not in assigned_outages),
        anchors=anchors,
        assigned_counts=counts,
        anchor_ages_s=ages,
    )


def _apply_run_locations(
    state: PlannerState, asg: Assignment, locations: dict[str, GeoPoint]
) -> PlannerState:
    new_state = apply_run(state, asg)
    for crew_id, outage_id in asg.pairs:
        new_state.anchors[crew_id] = locations[outage_id]
        new_state.anchor_ages_s[crew_id] = 0.0
        new_state.assigned_counts[crew_id] = new_state.assigned_counts.get(crew_id, 0) + 1
    return new_state


def plan_pipelines(
    snapshot: Snapshot,
    cfg: PlannerConfig | None = None,
    provider: TravelProvider | None = None,
) -> PlanPipelines:
    """One full planning cycle: up to ``k_max`` matcher runs over a snapshot.

    Duplicate tickets are merged first (locks follow their survivor), and
    tickets created after the snapshot instant are excluded outright, so a
    plan can never use information from the future. Stops early when the
    queue empties or no crew can take more work. On a travel-provider
    failure the runs completed so far are returned flagged partial rather
    than discarded.
    """
    if cfg is None:
        cfg = PlannerConfig()

    merged = merge_duplicates(snapshot.tickets)
    survivor_of: dict[str, str] = {}
    for ticket in merged:
        for absorbed in ticket.absorbed_ids:
            survivor_of[absorbed] = ticket.id

    candidates = [t for t in merged if t.created_at <= snapshot.taken_at]
    ticket_by_id = {t.id: t for t in candidates}
    weighted_by_id: dict[str, WeightedOutage] = {
        wo.ticket.id: wo for wo in weigh_all(candidates, cfg.priority)
    }

    state = PlannerState(
        run_index=1,
        candidate_ids=tuple(t.id for t in candidates),
        anchors={c.id: c.anchor for c in snapshot.crews},
        assigned_counts={c.id: c.assigned_count for c in snapshot.crews},
        anchor_ages_s={
            c.id: max(0.0, (snapshot.taken_at - c.anchor_confirmed_at).total_seconds())
            for c in snapshot.crews
        },
    )
    pipelines: dict[str, list[PlanSlot]] = {c.id: [] for c in snapshot.crews}
    locations = {t.id: t.location for t in candidates}

    partial = False
    error: str | None = None
    runs_completed = 0

    for k in range(1, cfg.k_max + 1):
        eligible = _eligible_for_run(snapshot, state.assigned_counts, cfg.k_max)
        if not eligible or not state.candidate_ids:
            break
        crews = [snapshot.crew_by_id(cid) for cid in eligible]
        outages = [weighted_by_id[oid] for oid in state.candidate_ids]
        locks = _lock_pairs(snapshot, survivor_of, eligible) if k == 1 else set()
        # A lock can reference a ticket created after taken_at in synthetic
        # setups; drop rather than fail (it will bind next cycle).
        locks = {(c, o) for c, o in locks if o in ticket_by_id}
        try:
            matrix = build_matrix(
                [state.anchors[cid] for cid in eligible],
                [locations[oid] for oid in state.candidate_ids],
                cfg.travel,
                provider,
            )
            pm = profit_matrix(
                crews,
                outages,
                matrix,
                cfg.beta_dist,
                run_index=k,
                anchor_ages_s=state.anchor_ages_s,
                travel_cfg=cfg.travel,
            )
            asg = solve_assignment(pm, locks=locks, force_full=cfg.force_full)
        except (MissingTau, RouterUnavailable, MatrixMiss, InfeasibleLocks) as exc:
            partial = True
            error = f"{type(exc).__name__}: {exc}"
            break

        col = {oid: j for j, oid in enumerate(state.candidate_ids)}
        rowi = {cid: i for i, cid in enumerate(eligible)}
        for crew_id, outage_id in asg.canonical_pairs():
            wo = weighted_by_id[outage_id]
            tau_s = robustify(
                matrix.seconds[rowi[crew_id]][col[outage_id]],
                state.anchor_ages_s.get(crew_id, 0.0),
                cfg.travel,
            )
            tau_min = tau_s / 60.0
            pi = pm.profit[rowi[crew_id]][col[outage_id]]
            pipelines[crew_id].append(PlanSlot(
                outage_id=outage_id,
                frozen=False,
                rationale=(
                    f"w={_fmt(wo.weight)} τ={_fmt(tau_min)} "
                    f"π={_fmt(pi)} rank={k}"
                ),
            ))
        state = _apply_run_locations(state, asg, locations)
        runs_completed = k

    return PlanPipelines(
        snapshot_id=snapshot.snapshot_id,
        created_at=snapshot.taken_at,
        pipelines={cid: tuple(slots) for cid, slots in pipelines.items()},
        runs_completed=runs_completed,
        partial=partial,
        error=error,
    )


def freeze_first(plan: PlanPipelines) -> PlanPipelines:
    """Freeze slot 1 of every non-empty pipeline (idempotent)."""
    new_pipes: dict[str, tuple[PlanSlot, ...]] = {}
    for crew_id, slots in plan.pipelines.items():
        if slots:
            first = replace(slots[0], frozen=True)
            new_pipes[crew_id] = (first,) + slots[1:]
        else:
            new_pipes[crew_id] = slots
    return replace(plan, pipelines=new_pipes)


def plan_to_doc(plan: PlanPipelines) -> dict:
    """JSON-ready rendering with deterministic ordering."""
    return {
        "snapshot_id": plan.snapshot_id,
        "created_at": format_rfc3339(plan.created_at),
        "runs_completed": plan.runs_completed,
        "partial": plan.partial,
        "error": plan.error,
        "pipelines": {
            crew_id: [
                {"outage_id": s.outage_id, "frozen": s.frozen, "rationale": s.rationale}
                for s in plan.pipelines[crew_id]
            ]
            for crew_id in sorted(plan.pipelines)
        },
    }


def plan_from_doc(doc: dict) -> PlanPipelines:
    """Inverse of :func:`plan_to_doc` (used for audit-log reconstruction)."""
    return PlanPipelines(
        snapshot_id=doc["snapshot_id"],
        created_at=parse_rfc3339(doc["created_at"]),
        pipelines={
            crew_id: tuple(
                PlanSlot(s["outage_id"], s["frozen"], s["rationale"]) for s in slots
            )
            for crew_id, slots in doc["pipelines"].items()
        },
        runs_completed=doc["runs_completed"],
        partial=doc.get("partial", False),
        error=doc.get("error"),
    )
