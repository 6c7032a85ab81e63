"""Business-as-usual baseline: greedy nearest-ticket dispatch.

Models the manual practice this system replaces: whenever a crew frees
up, it takes the closest open ticket by squared planar distance, one job
at a time, with no batching, no priorities, and no travel-time model.
Distances are squared meters on a local planar projection about the AWC
yard, which is the best-case reading of proximity-only dispatch.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

from .geo import local_sq_distance
from .model import CrewState, GeoPoint, OutageTicket


@dataclass(frozen=True)
class BauEvent:
    """One greedy dispatch decision, kept for audit and tests."""

    time: datetime
    crew_id: str
    outage_id: str
    distance_proxy: float  # squared planar meters at decision time


def bau_assign(
    crew: CrewState,
    open_outages: list[OutageTicket],
    yard: GeoPoint,
) -> str | None:
    """Pick the nearest open ticket for one crew, or None when idle.

    Nearest by squared planar distance from the crew's current anchor,
    projected about the yard; ties go to the earliest created_at, then
    the lower ticket id.
    """
    best_id: str | None = None
    best_key: tuple[float, datetime, str] | None = None
    for ticket in open_outages:
        d2 = local_sq_distance(crew.anchor, ticket.location, yard)
        key = (d2, ticket.created_at, ticket.id)
        if best_key is None or key < best_key:
            best_key = key
            best_id = ticket.id
    return best_id


def bau_replay(scenario):
    """Run the BAU policy over a scenario. See :func:`stormcrew.replay.replay`."""
    from .replay import replay  # deferred: replay drives both policy arms

    return replay(scenario, policy="bau")
