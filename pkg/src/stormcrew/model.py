"""Domain types, snapshot validation, duplicate merging, and crew eligibility.

Everything here is immutable after construction and safe to share between
threads. Timestamps are timezone-aware UTC throughout; the snapshot's
``taken_at`` is the authoritative clock for planning (replay never reads
the wall clock).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum

from .errors import AwcMismatch, InvariantError, SchemaError

logger = logging.getLogger(__name__)

MAX_ASSIGNED_PER_CREW = 3

# Invented duplicate-merge thresholds; the upstream ticket feed gives no
# rule, so these are deliberately conservative (under-merge, never over-merge).
DEFAULT_MERGE_DISTANCE_M = 25.0
DEFAULT_MERGE_WINDOW_S = 15 * 60.0


class Category(str, Enum):
    """Outage ticket classification. FPS1..FPS3 are fire/police/safety tiers."""

    FPS1 = "FPS1"
    FPS2 = "FPS2"
    FPS3 = "FPS3"
    CRITICAL = "Critical"
    SINGLE = "Single"
    NON_OUTAGE = "NonOutage"


FPS_CATEGORIES = frozenset({Category.FPS1, Category.FPS2, Category.FPS3})


def parse_rfc3339(value: str) -> datetime:
    """Parse an RFC3339 timestamp to an aware UTC datetime."""
    if not isinstance(value, str):
        raise SchemaError(f"timestamp must be a string, got {type(value).__name__}")
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        parsed = datetime.fromisoformat(text)
    except ValueError as exc:
        raise SchemaError(f"invalid RFC3339 timestamp {value!r}") from exc
    if parsed.tzinfo is None:
        raise SchemaError(f"timestamp {value!r} lacks a UTC offset")
    return parsed.astimezone(timezone.utc)


def format_rfc3339(ts: datetime) -> str:
    """Canonical RFC3339 rendering with a Z suffix (byte-stable output)."""
    return ts.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


@dataclass(frozen=True)
class GeoPoint:
    """WGS84 coordinate. Bounds are enforced on construction."""

    lat: float
    lon: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise InvariantError(f"coordinates must be finite, got ({self.lat}, {self.lon})")
        if not -90.0 <= self.lat <= 90.0:
            raise InvariantError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise InvariantError(f"longitude {self.lon} outside [-180, 180]")


@dataclass(frozen=True)
class AwcId:
    """Area work center identity plus its yard (crew start location)."""

    code: str
    yard: GeoPoint

    def __post_init__(self) -> None:
        if not self.code:
            raise InvariantError("AWC code must be non-empty")


@dataclass(frozen=True)
class OutageTicket:
    """One outage ticket as carried by the outage management feed.

    ``assessed_customers`` is the customer count that progresses through
    damage assessment when this ticket is visited; it feeds the CATR metric.
    ``absorbed_ids`` lists tickets folded into this one by duplicate merging.
    """

    id: str
    awc: str
    location: GeoPoint
    created_at: datetime
    customers: int
    category: Category
    assessed_customers: int = 0
    absorbed_ids: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.id:
            raise InvariantError("ticket id must be non-empty")
        if self.customers < 1:
            raise InvariantError(f"ticket {self.id}: customers must be >= 1, got {self.customers}")
        if self.assessed_customers < 0:
            raise InvariantError(f"ticket {self.id}: assessed_customers must be >= 0")
        if self.assessed_customers > self.customers:
            raise InvariantError(
                f"ticket {self.id}: assessed_customers {self.assessed_customers} "
                f"exceeds customers {self.customers}"
            )

    @property
    def is_fps(self) -> bool:
        return self.category in FPS_CATEGORIES


@dataclass(frozen=True)
class CrewState:
    """One damage-assessment crew.

    ``anchor`` is the last confirmed location (there is no live GPS feed);
    its age at planning time drives travel-estimate robustification.
    ``assigned_count`` counts pipeline slots already committed this cycle,
    excluding the job referenced by ``locked_to``.
    """

    id: str
    awc: str
    anchor: GeoPoint
    anchor_confirmed_at: datetime
    availability: bool = True
    frozen: bool = False
    locked_to: str | None = None
    assigned_count: int = 0
    shift_active: bool = True

    def __post_init__(self) -> None:
        if not self.id:
            raise InvariantError("crew id must be non-empty")
        if not 0 <= self.assigned_count <= MAX_ASSIGNED_PER_CREW:
            raise InvariantError(
                f"crew {self.id}: assigned_count {self.assigned_count} outside "
                f"[0, {MAX_ASSIGNED_PER_CREW}]"
            )


@dataclass(frozen=True)
class Snapshot:
    """Immutable outage-management state at one instant (``taken_at``)."""

    awc: AwcId
    taken_at: datetime
    snapshot_id: str
    tickets: tuple[OutageTicket, ...]
    crews: tuple[CrewState, ...]

    def __post_init__(self) -> None:
        if not self.snapshot_id:
            raise InvariantError("snapshot_id must be non-empty")
        ticket_ids = [t.id for t in self.tickets]
        if len(set(ticket_ids)) != len(ticket_ids):
            dupes = sorted({i for i in ticket_ids if ticket_ids.count(i) > 1})
            raise InvariantError(f"duplicate ticket ids in snapshot: {dupes}")
        crew_ids = [c.id for c in self.crews]
        if len(set(crew_ids)) != len(crew_ids):
            dupes = sorted({i for i in crew_ids if crew_ids.count(i) > 1})
            raise InvariantError(f"duplicate crew ids in snapshot: {dupes}")
        known = set(ticket_ids)
        for ticket in self.tickets:
            if ticket.awc != self.awc.code:
                raise AwcMismatch(
                    f"ticket {ticket.id} belongs to AWC {ticket.awc!r}, "
                    f"snapshot declares {self.awc.code!r}"
                )
        for crew in self.crews:
            if crew.awc != self.awc.code:
                raise AwcMismatch(
                    f"crew {crew.id} belongs to AWC {crew.awc!r}, "
                    f"snapshot declares {self.awc.code!r}"
                )
            if crew.locked_to is not None and crew.locked_to not in known:
                raise InvariantError(
                    f"crew {crew.id} locked to unknown ticket {crew.locked_to!r}"
                )

    def ticket_by_id(self, ticket_id: str) -> OutageTicket:
        for ticket in self.tickets:
            if ticket.id == ticket_id:
                return ticket
        raise KeyError(ticket_id)

    def crew_by_id(self, crew_id: str) -> CrewState:
        for crew in self.crews:
            if crew.id == crew_id:
                return crew
        raise KeyError(crew_id)


# -- wire schema -------------------------------------------------------------

_GEO_FIELDS = {"lat", "lon"}
_AWC_FIELDS = {"code", "yard"}
_TICKET_FIELDS = {
    "id", "awc", "location", "created_at", "customers", "category", "assessed_customers",
}
_TICKET_OPTIONAL = {"assessed_customers"}
_CREW_FIELDS = {
    "id", "awc", "anchor", "anchor_confirmed_at", "availability", "frozen",
    "locked_to", "assigned_count", "shift_active",
}
_CREW_OPTIONAL = {"availability", "frozen", "locked_to", "assigned_count", "shift_active"}
_SNAPSHOT_FIELDS = {"awc", "taken_at", "snapshot_id", "tickets", "crews"}


def _check_keys(doc: dict, allowed: set[str], required: set[str], where: str, lenient: bool) -> None:
    if not isinstance(doc, dict):
        raise SchemaError(f"{where}: expected an object, got {type(doc).__name__}")
    missing = required - doc.keys()
    if missing:
        raise SchemaError(f"{where}: missing required field(s) {sorted(missing)}")
    unknown = doc.keys() - allowed
    if unknown:
        if lenient:
            logger.warning("%s: ignoring unknown field(s) %s", where, sorted(unknown))
        else:
            raise SchemaError(f"{where}: unknown field(s) {sorted(unknown)}")


def _parse_geo(doc, where: str, lenient: bool) -> GeoPoint:
    _check_keys(doc, _GEO_FIELDS, _GEO_FIELDS, where, lenient)
    lat, lon = doc["lat"], doc["lon"]
    if not isinstance(lat, (int, float)) or not isinstance(lon, (int, float)) \
            or isinstance(lat, bool) or isinstance(lon, bool):
        raise SchemaError(f"{where}: lat/lon must be numbers")
    return GeoPoint(float(lat), float(lon))


def _require_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{where}: expected an integer, got {value!r}")
    return value


def _require_bool(value, where: str) -> bool:
    if not isinstance(value, bool):
        raise SchemaError(f"{where}: expected a boolean, got {value!r}")
    return value


def _require_str(value, where: str) -> str:
    if not isinstance(value, str):
        raise SchemaError(f"{where}: expected a string, got {value!r}")
    return value


def _parse_ticket(doc, lenient: bool) -> OutageTicket:
    where = f"ticket {doc.get('id', '?') if isinstance(doc, dict) else '?'}"
    _check_keys(doc, _TICKET_FIELDS, _TICKET_FIELDS - _TICKET_OPTIONAL, where, lenient)
    try:
        category = Category(_require_str(doc["category"], f"{where}.category"))
    except ValueError as exc:
        raise SchemaError(f"{where}: unknown category {doc['category']!r}") from exc
    customers = _require_int(doc["customers"], f"{where}.customers")
    assessed = doc.get("assessed_customers", 0)
    return OutageTicket(
        id=_require_str(doc["id"], f"{where}.id"),
        awc=_require_str(doc["awc"], f"{where}.awc"),
        location=_parse_geo(doc["location"], f"{where}.location", lenient),
        created_at=parse_rfc3339(doc["created_at"]),
        customers=customers,
        category=category,
        assessed_customers=_require_int(assessed, f"{where}.assessed_customers"),
    )


def _parse_crew(doc, lenient: bool) -> CrewState:
    where = f"crew {doc.get('id', '?') if isinstance(doc, dict) else '?'}"
    _check_keys(doc, _CREW_FIELDS, _CREW_FIELDS - _CREW_OPTIONAL, where, lenient)
    locked_to = doc.get("locked_to")
    if locked_to is not None:
        locked_to = _require_str(locked_to, f"{where}.locked_to")
    return CrewState(
        id=_require_str(doc["id"], f"{where}.id"),
        awc=_require_str(doc["awc"], f"{where}.awc"),
        anchor=_parse_geo(doc["anchor"], f"{where}.anchor", lenient),
        anchor_confirmed_at=parse_rfc3339(doc["anchor_confirmed_at"]),
        availability=_require_bool(doc.get("availability", True), f"{where}.availability"),
        frozen=_require_bool(doc.get("frozen", False), f"{where}.frozen"),
        locked_to=locked_to,
        assigned_count=_require_int(doc.get("assigned_count", 0), f"{where}.assigned_count"),
        shift_active=_require_bool(doc.get("shift_active", True), f"{where}.shift_active"),
    )


def validate_snapshot(raw: dict, *, lenient: bool = False) -> Snapshot:
    """Validate an untyped snapshot document into a :class:`Snapshot`.

    Strict mode (the default) rejects unknown keys; lenient mode logs a
    warning and drops them. Invariant violations always reject; nothing is
    silently coerced.
    """
    _check_keys(raw, _SNAPSHOT_FIELDS, _SNAPSHOT_FIELDS, "snapshot", lenient)
    awc_doc = raw["awc"]
    _check_keys(awc_doc, _AWC_FIELDS, _AWC_FIELDS, "snapshot.awc", lenient)
    awc = AwcId(
        code=_require_str(awc_doc["code"], "snapshot.awc.code"),
        yard=_parse_geo(awc_doc["yard"], "snapshot.awc.yard", lenient),
    )
    if not isinstance(raw["tickets"], list):
        raise SchemaError("snapshot.tickets must be a list")
    if not isinstance(raw["crews"], list):
        raise SchemaError("snapshot.crews must be a list")
    tickets = tuple(_parse_ticket(t, lenient) for t in raw["tickets"])
    crews = tuple(_parse_crew(c, lenient) for c in raw["crews"])
    return Snapshot(
        awc=awc,
        taken_at=parse_rfc3339(raw["taken_at"]),
        snapshot_id=_require_str(raw["snapshot_id"], "snapshot.snapshot_id"),
        tickets=tickets,
        crews=crews,
    )


def geo_to_doc(point: GeoPoint) -> dict:
    return {"lat": point.lat, "lon": point.lon}


def ticket_to_doc(ticket: OutageTicket) -> dict:
    return {
        "id": ticket.id,
        "awc": ticket.awc,
        "location": geo_to_doc(ticket.location),
        "created_at": format_rfc3339(ticket.created_at),
        "customers": ticket.customers,
        "category": ticket.category.value,
        "assessed_customers": ticket.assessed_customers,
    }


def crew_to_doc(crew: CrewState) -> dict:
    return {
        "id": crew.id,
        "awc": crew.awc,
        "anchor": geo_to_doc(crew.anchor),
        "anchor_confirmed_at": format_rfc3339(crew.anchor_confirmed_at),
        "availability": crew.availability,
        "frozen": crew.frozen,
        "locked_to": crew.locked_to,
        "assigned_count": crew.assigned_count,
        "shift_active": crew.shift_active,
    }


def snapshot_to_doc(snapshot: Snapshot) -> dict:
    return {
        "awc": {"code": snapshot.awc.code, "yard": geo_to_doc(snapshot.awc.yard)},
        "taken_at": format_rfc3339(snapshot.taken_at),
        "snapshot_id": snapshot.snapshot_id,
        "tickets": [ticket_to_doc(t) for t in snapshot.tickets],
        "crews": [crew_to_doc(c) for c in snapshot.crews],
    }


# -- duplicate merging -------------------------------------------------------

def merge_duplicates(
    tickets: list[OutageTicket] | tuple[OutageTicket, ...],
    *,
    distance_m: float = DEFAULT_MERGE_DISTANCE_M,
    window_s: float = DEFAULT_MERGE_WINDOW_S,
) -> list[OutageTicket]:
    """Collapse near-duplicate tickets into a single survivor each.

    Two tickets merge when they are within ``distance_m`` great-circle
    meters, share a category, and were created within ``window_s`` of each
    other; merging is transitive (union-find groups). The survivor keeps the
    earliest ``created_at`` (ties by id), customers take the group maximum
    (never summed), and absorbed ids are recorded. Output order is
    deterministic by (created_at, id). Idempotent: merging twice equals
    merging once.
    """
    from .geo import haversine_m  # local import avoids a cycle at module load

    items = list(tickets)
    n = len(items)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri

    for i in range(n):
        for j in range(i + 1, n):
            a, b = items[i], items[j]
            if a.category != b.category:
                continue
            if abs((a.created_at - b.created_at).total_seconds()) > window_s:
                continue
            if haversine_m(a.location, b.location) > distance_m:
                continue
            union(i, j)

    groups: dict[int, list[OutageTicket]] = {}
    for i, ticket in enumerate(items):
        groups.setdefault(find(i), []).append(ticket)

    merged: list[OutageTicket] = []
    for group in groups.values():
        if len(group) == 1:
            merged.append(group[0])
            continue
        survivor = min(group, key=lambda t: (t.created_at, t.id))
        absorbed = sorted(t.id for t in group if t is not survivor)
        merged.append(replace(
            survivor,
            customers=max(t.customers for t in group),
            assessed_customers=max(t.assessed_customers for t in group),
            absorbed_ids=tuple(sorted(set(survivor.absorbed_ids) | set(absorbed))),
        ))
    merged.sort(key=lambda t: (t.created_at, t.id))
    return merged


def eligible_crews(snapshot: Snapshot) -> list[str]:
    """Crew ids eligible for new assignments, sorted by id.

    A crew is eligible when its availability flag is set, it is not frozen
    by an operator, its shift is active, and it has capacity left
    (fewer than three committed slots).
    """
    return sorted(
        crew.id
        for crew in snapshot.crews
        if crew.availability
        and not crew.frozen
        and crew.shift_active
        and crew.assigned_count < MAX_ASSIGNED_PER_CREW
    )
