"""Shared builders for tests: one synthetic AWC with metric-offset geometry.

``pt`` places points by meter offsets from the yard. Pure-north offsets
lie on a meridian, so their great-circle distance equals the offset
exactly; east offsets are small-angle approximations (good to <0.01% at
this latitude and scale), which is plenty for anything asserted with a
tolerance.
"""
from __future__ import annotations

import math
from datetime import datetime, timedelta, timezone

from stormcrew.model import (
    AwcId,
    Category,
    CrewState,
    GeoPoint,
    OutageTicket,
    Snapshot,
)

T0 = datetime(2024, 3, 23, 12, 0, tzinfo=timezone.utc)
AWC_CODE = "VT-NE"
YARD = GeoPoint(43.20, -72.40)
AWC = AwcId(code=AWC_CODE, yard=YARD)

EARTH_RADIUS_M = 6_371_008.8
M_PER_DEG_LAT = math.pi * EARTH_RADIUS_M / 180.0
MPH_TO_MPS = 1609.344 / 3600.0


def minutes(n: float) -> timedelta:
    return timedelta(minutes=n)


def pt(east_m: float = 0.0, north_m: float = 0.0, origin: GeoPoint = YARD) -> GeoPoint:
    lat = origin.lat + north_m / M_PER_DEG_LAT
    lon = origin.lon + east_m / (M_PER_DEG_LAT * math.cos(math.radians(origin.lat)))
    return GeoPoint(lat, lon)


def ticket(
    tid: str,
    *,
    east: float = 0.0,
    north: float = 0.0,
    customers: int = 1,
    category: Category = Category.SINGLE,
    created: datetime = T0,
    at: GeoPoint | None = None,
    **kw,
) -> OutageTicket:
    return OutageTicket(
        id=tid,
        awc=AWC_CODE,
        location=at if at is not None else pt(east, north),
        created_at=created,
        customers=customers,
        category=category,
        **kw,
    )


def crew(
    cid: str,
    *,
    east: float = 0.0,
    north: float = 0.0,
    confirmed: datetime = T0,
    at: GeoPoint | None = None,
    **kw,
) -> CrewState:
    return CrewState(
        id=cid,
        awc=AWC_CODE,
        anchor=at if at is not None else pt(east, north),
        anchor_confirmed_at=confirmed,
        **kw,
    )


def snap(tickets, crews, *, taken: datetime = T0, sid: str = "snap-1") -> Snapshot:
    return Snapshot(
        awc=AWC,
        taken_at=taken,
        snapshot_id=sid,
        tickets=tuple(tickets),
        crews=tuple(crews),
    )
