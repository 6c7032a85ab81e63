"""Great-circle distance and a local planar projection.

Distances use the mean Earth radius haversine, which is accurate to well
under 0.5% at service-territory scale. The planar projection is a simple
equirectangular map about a fixed origin; it exists so squared planar
distance can reproduce the legacy nearest-ticket dispatcher exactly.
"""
from __future__ import annotations

import math

from .model import GeoPoint

EARTH_RADIUS_M = 6_371_008.8
METERS_PER_MILE = 1609.344


def haversine_m(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance between two points in meters."""
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dphi = math.radians(b.lat - a.lat)
    dlam = math.radians(b.lon - a.lon)
    h = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(math.sqrt(h))


def haversine_miles(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in statute miles."""
    return haversine_m(a, b) / METERS_PER_MILE


def to_local_xy(point: GeoPoint, origin: GeoPoint) -> tuple[float, float]:
    """Project to meters east/north of ``origin`` (equirectangular).

    Longitude is scaled by the cosine of the origin latitude so east-west
    meters are comparable to north-south meters near the origin.
    """
    x = math.radians(point.lon - origin.lon) * math.cos(math.radians(origin.lat)) * EARTH_RADIUS_M
    y = math.radians(point.lat - origin.lat) * EARTH_RADIUS_M
    return x, y


def local_sq_distance(a: GeoPoint, b: GeoPoint, origin: GeoPoint) -> float:
    """Squared planar distance (m^2) between two points in the local frame."""
    ax, ay = to_local_xy(a, origin)
    bx, by = to_local_xy(b, origin)
    return (ax - bx) ** 2 + (ay - by) ** 2
