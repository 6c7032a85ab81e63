"""Storm scenarios: a timed outage stream plus a crew roster.

A scenario is everything a replay needs to be reproducible: the AWC and
its yard, the horizon, tickets with arrival times, crews starting at the
yard, an assessment-duration model, and travel settings. Scenarios are
plain JSON on disk.

``generate_scenario`` builds synthetic desk-scale storms: outage locations
uniform over a disc around the yard, arrivals front-loaded by default,
customer counts log-uniform in [1, 500].
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

from .errors import InvariantError, SchemaError
from .geo import EARTH_RADIUS_M
from .model import (
    AwcId,
    Category,
    CrewState,
    GeoPoint,
    OutageTicket,
    crew_to_doc,
    format_rfc3339,
    geo_to_doc,
    parse_rfc3339,
    ticket_to_doc,
    validate_snapshot,
)
from .travel import TravelConfig

DEFAULT_ASSESS_MINUTES = 20.0


@dataclass(frozen=True)
class AssessModel:
    """How long an assessment takes at one outage site.

    Resolution order: per-ticket override, then per-category minutes, then
    the fixed default.
    """

    fixed_minutes: float = DEFAULT_ASSESS_MINUTES
    per_category: dict[str, float] = field(default_factory=dict)
    per_ticket: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.fixed_minutes <= 0:
            raise InvariantError(f"fixed_minutes must be positive, got {self.fixed_minutes}")
        for mapping in (self.per_category, self.per_ticket):
            for key, minutes in mapping.items():
                if minutes <= 0:
                    raise InvariantError(f"assess minutes for {key!r} must be positive")

    def duration_s(self, ticket: OutageTicket) -> float:
        minutes = self.per_ticket.get(
            ticket.id, self.per_category.get(ticket.category.value, self.fixed_minutes)
        )
        return minutes * 60.0


@dataclass(frozen=True)
class Scenario:
    """One replayable storm for a single AWC."""

    scenario_id: str
    awc: AwcId
    start: datetime
    end: datetime
    tickets: tuple[OutageTicket, ...]
    crews: tuple[CrewState, ...]
    assess: AssessModel = field(default_factory=AssessModel)
    travel: TravelConfig = field(default_factory=TravelConfig)
    rng_seed: int = 0
    run_to_completion: bool = True

    def __post_init__(self) -> None:
        if self.end <= self.start:
            raise InvariantError("scenario end must be after start")
        times = [t.created_at for t in self.tickets]
        if times != sorted(times):
            raise InvariantError("outage stream must be sorted by created_at")
        for t in self.tickets:
            if not (self.start <= t.created_at <= self.end):
                raise InvariantError(
                    f"ticket {t.id} created_at outside the scenario horizon"
                )


@dataclass(frozen=True)
class GenParams:
    """Knobs for synthetic storm generation."""

    n_crews: int = 7
    n_outages: int = 90
    fps_fraction: float = 0.05
    area_km: float = 12.0
    horizon_hours: float = 6.0
    arrival_profile: str = "front"

    def __post_init__(self) -> None:
        if self.n_crews < 1 or self.n_outages < 0:
            raise InvariantError("n_crews must be >= 1 and n_outages >= 0")
        if not 0.0 <= self.fps_fraction <= 1.0:
            raise InvariantError(f"fps_fraction must be in [0,1], got {self.fps_fraction}")
        if self.area_km <= 0 or self.horizon_hours <= 0:
            raise InvariantError("area_km and horizon_hours must be positive")
        if self.arrival_profile not in ("front", "uniform"):
            raise InvariantError(f"unknown arrival_profile {self.arrival_profile!r}")


BASE_YARD = GeoPoint(43.20, -72.40)
BASE_START = datetime(2024, 3, 23, 12, 0, tzinfo=timezone.utc)

_FPS_TIERS = (Category.FPS1, Category.FPS2, Category.FPS3)
_NON_FPS = (Category.CRITICAL, Category.SINGLE, Category.NON_OUTAGE)
_NON_FPS_WEIGHTS = (0.15, 0.70, 0.15)


def _offset(origin: GeoPoint, east_m: float, north_m: float) -> GeoPoint:
    dlat = math.degrees(north_m / EARTH_RADIUS_M)
    dlon = math.degrees(east_m / (EARTH_RADIUS_M * math.cos(math.radians(origin.lat))))
    return GeoPoint(origin.lat + dlat, origin.lon + dlon)


def generate_scenario(seed: int, params: GenParams | None = None) -> Scenario:
    """Deterministic synthetic storm. Same seed, same scenario, always."""
    if params is None:
        params = GenParams()
    rng = random.Random(seed)
    yard = BASE_YARD
    awc = AwcId(code="AWC-1", yard=yard)
    start = BASE_START
    end = start + timedelta(hours=params.horizon_hours)
    horizon_s = (end - start).total_seconds()

    tickets: list[OutageTicket] = []
    for i in range(params.n_outages):
        # uniform over a disc: r = R*sqrt(u)
        radius = params.area_km * 1000.0 * math.sqrt(rng.random())
        theta = rng.random() * 2.0 * math.pi
        location = _offset(yard, radius * math.cos(theta), radius * math.sin(theta))
        if params.arrival_profile == "front":
            frac = rng.random() ** 2  # mass toward the storm onset
        else:
            frac = rng.random()
        created = start + timedelta(seconds=round(frac * horizon_s))
        customers = max(1, int(round(math.exp(rng.random() * math.log(500.0)))))
        if rng.random() < params.fps_fraction:
            category = _FPS_TIERS[rng.randrange(3)]
        else:
            category = rng.choices(_NON_FPS, weights=_NON_FPS_WEIGHTS, k=1)[0]
        tickets.append(OutageTicket(
            id=f"r{i + 1:03d}",
            awc=awc.code,
            location=location,
            created_at=created,
            customers=customers,
            category=category,
        ))
    tickets.sort(key=lambda t: (t.created_at, t.id))

    crews = tuple(
        CrewState(
            id=f"c{i + 1}",
            awc=awc.code,
            anchor=yard,
            anchor_confirmed_at=start,
        )
        for i in range(params.n_crews)
    )
    return Scenario(
        scenario_id=f"scn-{seed}-{params.n_crews}x{params.n_outages}",
        awc=awc,
        start=start,
        end=end,
        tickets=tuple(tickets),
        crews=crews,
        rng_seed=seed,
    )


# -- serialization -----------------------------------------------------------

def scenario_to_doc(scenario: Scenario) -> dict:
    return {
        "scenario_id": scenario.scenario_id,
        "awc": {"code": scenario.awc.code, "yard": geo_to_doc(scenario.awc.yard)},
        "start": format_rfc3339(scenario.start),
        "end": format_rfc3339(scenario.end),
        "tickets": [ticket_to_doc(t) for t in scenario.tickets],
        "crews": [crew_to_doc(c) for c in scenario.crews],
        "assess": {
            "fixed_minutes": scenario.assess.fixed_minutes,
            "per_category": dict(scenario.assess.per_category),
            "per_ticket": dict(scenario.assess.per_ticket),
        },
        "travel": {
            "fallback_speed_mph": scenario.travel.fallback_speed_mph,
            "staleness_alpha": scenario.travel.staleness_alpha,
            "staleness_threshold_s": scenario.travel.staleness_threshold_s,
            "router_endpoint": scenario.travel.router_endpoint,
            "router_timeout_s": scenario.travel.router_timeout_s,
            "haversine_fallback": scenario.travel.haversine_fallback,
        },
        "rng_seed": scenario.rng_seed,
        "run_to_completion": scenario.run_to_completion,
    }


def scenario_from_doc(doc: dict) -> Scenario:
    try:
        # Reuse the snapshot validator for the shared ticket/crew shapes by
        # wrapping them in a synthetic snapshot document.
        shim = validate_snapshot({
            "awc": doc["awc"],
            "taken_at": doc["end"],
            "snapshot_id": doc.get("scenario_id", "scenario"),
            "tickets": doc["tickets"],
            "crews": doc["crews"],
        })
        assess_doc = doc.get("assess", {})
        travel_doc = doc.get("travel", {})
        return Scenario(
            scenario_id=doc["scenario_id"],
            awc=shim.awc,
            start=parse_rfc3339(doc["start"]),
            end=parse_rfc3339(doc["end"]),
            tickets=shim.tickets,
            crews=shim.crews,
            assess=AssessModel(
                fixed_minutes=assess_doc.get("fixed_minutes", DEFAULT_ASSESS_MINUTES),
                per_category=dict(assess_doc.get("per_category", {})),
                per_ticket=dict(assess_doc.get("per_ticket", {})),
            ),
            travel=TravelConfig(
                fallback_speed_mph=travel_doc.get("fallback_speed_mph", 22.5),
                staleness_alpha=travel_doc.get("staleness_alpha", 0.15),
                staleness_threshold_s=travel_doc.get("staleness_threshold_s", 900.0),
                router_endpoint=travel_doc.get("router_endpoint"),
                router_timeout_s=travel_doc.get("router_timeout_s", 10.0),
                haversine_fallback=travel_doc.get("haversine_fallback", True),
            ),
            rng_seed=doc.get("rng_seed", 0),
            run_to_completion=doc.get("run_to_completion", True),
        )
    except KeyError as exc:
        raise SchemaError(f"scenario document missing field: {exc}") from exc


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"scenario file is not valid JSON: {exc}") from exc
    return scenario_from_doc(doc)


def save_scenario(scenario: Scenario, path) -> None:
    with open(path, "w") as fh:
        json.dump(scenario_to_doc(scenario), fh, indent=2, sort_keys=True)
        fh.write("\n")
