"""Route-quality metrics for replay comparisons.

Distances are straight-line leg sums in statute miles (route geometry is
site-to-site; road polylines are out of scope). Interference between
crews is measured two ways: crossover_count (route segments of different
crews that geometrically intersect while traversed within a 30 minute
tolerance of each other) and overlap_index (fraction of 100 m raster
cells touched by more than one crew). Both tolerances are configurable.
"""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from datetime import timedelta

from .errors import UnknownCrew
from .geo import haversine_miles, to_local_xy
from .model import GeoPoint
from .replay import RouteLog, check_same_scenario

DEFAULT_CROSSOVER_TOLERANCE_S = 30 * 60.0
DEFAULT_RASTER_CELL_M = 100.0

_EPS = 1e-9


@dataclass(frozen=True)
class MetricsReport:
    """Metrics for one route log, optionally against a comparison log."""

    policy: str
    scenario_id: str
    per_crew_miles: dict[str, float]
    total_miles: float
    crossover_count: int
    overlap_index: float
    workload_dispersion: float
    locality_radius_miles: dict[str, float]
    base_policy: str | None = None
    base_total_miles: float | None = None
    miles_saved: float | None = None
    percent_reduction: float | None = None
    runtime_stats: list = field(default_factory=list)


def reduction_stats(test_miles: float, base_miles: float) -> tuple[float, float]:
    """Miles saved and percent reduction of test vs base.

    percent = (base - test) / base * 100; zero base yields zero percent.
    """
    saved = base_miles - test_miles
    percent = (saved / base_miles * 100.0) if base_miles else 0.0
    return saved, percent


def crew_miles(log: RouteLog, crew_id: str) -> float:
    if crew_id not in log.visits:
        raise UnknownCrew(f"crew {crew_id!r} not in route log")
    return math.fsum(
        haversine_miles(v.from_point, v.to_point) for v in log.visits[crew_id]
    )


def _segments(log: RouteLog):
    """(crew, p_xy, q_xy, start, end) planar segments, zero-length dropped."""
    origin = log.awc.yard
    out = []
    for crew_id in sorted(log.visits):
        for v in log.visits[crew_id]:
            p = to_local_xy(v.from_point, origin)
            q = to_local_xy(v.to_point, origin)
            if math.hypot(q[0] - p[0], q[1] - p[1]) < _EPS:
                continue
            out.append((crew_id, p, q, v.depart_time, v.arrive_time))
    return out


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _close(a, b) -> bool:
    return abs(a[0] - b[0]) < _EPS and abs(a[1] - b[1]) < _EPS


def _on_segment(p, a, b) -> bool:
    """p collinear-with and within the bounding box of segment ab."""
    return (
        min(a[0], b[0]) - _EPS <= p[0] <= max(a[0], b[0]) + _EPS
        and min(a[1], b[1]) - _EPS <= p[1] <= max(a[1], b[1]) + _EPS
    )


def _segments_cross(p1, p2, q1, q2) -> bool:
    """True when segments intersect beyond merely sharing an endpoint.

    Crews departing a common yard touch at that shared point constantly;
    that is not interference, so endpoint-only contact does not count.
    Collinear overlap of positive length does.
    """
    d1 = _cross(q1, q2, p1)
    d2 = _cross(q1, q2, p2)
    d3 = _cross(p1, p2, q1)
    d4 = _cross(p1, p2, q2)

    if ((d1 > _EPS and d2 < -_EPS) or (d1 < -_EPS and d2 > _EPS)) and (
        (d3 > _EPS and d4 < -_EPS) or (d3 < -_EPS and d4 > _EPS)
    ):
        return True  # proper crossing

    collinear = all(abs(d) <= _EPS for d in (d1, d2, d3, d4))
    if collinear:
        # overlap length along the dominant axis
        axis = 0 if abs(p2[0] - p1[0]) >= abs(p2[1] - p1[1]) else 1
        lo = max(min(p1[axis], p2[axis]), min(q1[axis], q2[axis]))
        hi = min(max(p1[axis], p2[axis]), max(q1[axis], q2[axis]))
        return hi - lo > _EPS

    # improper touch: an endpoint lying on the other segment's interior
    for point, a, b in ((p1, q1, q2), (p2, q1, q2), (q1, p1, p2), (q2, p1, p2)):
        dd = _cross(a, b, point)
        if abs(dd) <= _EPS and _on_segment(point, a, b):
            if not (_close(point, a) or _close(point, b)):
                return True
    # anything left is endpoint-to-endpoint contact only
    return False


def crossover_count(
    log: RouteLog,
    tolerance_s: float = DEFAULT_CROSSOVER_TOLERANCE_S,
) -> int:
    """Pairs of different-crew segments that cross within the time tolerance."""
    segments = _segments(log)
    tol = timedelta(seconds=tolerance_s)
    count = 0
    for i in range(len(segments)):
        ci, p1, p2, s1, e1 = segments[i]
        for j in range(i + 1, len(segments)):
            cj, q1, q2, s2, e2 = segments[j]
            if ci == cj:
                continue
            gap = max(s1, s2) - min(e1, e2)
            if gap > tol:
                continue
            if _segments_cross(p1, p2, q1, q2):
                count += 1
    return count


def _raster_cells(p, q, cell_m: float) -> set[tuple[int, int]]:
    """Grid cells a segment passes through (Amanatides-Woo traversal)."""
    x0, y0 = p[0] / cell_m, p[1] / cell_m
    x1, y1 = q[0] / cell_m, q[1] / cell_m
    ix, iy = math.floor(x0), math.floor(y0)
    end_ix, end_iy = math.floor(x1), math.floor(y1)
    cells = {(ix, iy)}
    dx, dy = x1 - x0, y1 - y0
    step_x = 1 if dx > 0 else -1
    step_y = 1 if dy > 0 else -1
    t_max_x = ((ix + (step_x > 0)) - x0) / dx if dx else math.inf
    t_max_y = ((iy + (step_y > 0)) - y0) / dy if dy else math.inf
    t_delta_x = abs(1.0 / dx) if dx else math.inf
    t_delta_y = abs(1.0 / dy) if dy else math.inf
    guard = 0
    while (ix, iy) != (end_ix, end_iy):
        guard += 1
        if guard > 10_000_000:
            break
        if t_max_x < t_max_y:
            ix += step_x
            t_max_x += t_delta_x
        else:
            iy += step_y
            t_max_y += t_delta_y
        cells.add((ix, iy))
    return cells


def overlap_index(log: RouteLog, cell_m: float = DEFAULT_RASTER_CELL_M) -> float:
    """Fraction of traversed raster cells touched by 2+ distinct crews."""
    by_cell: dict[tuple[int, int], set[str]] = {}
    for crew_id, p, q, _, _ in _segments(log):
        for cell in _raster_cells(p, q, cell_m):
            by_cell.setdefault(cell, set()).add(crew_id)
    if not by_cell:
        return 0.0
    shared = sum(1 for crews in by_cell.values() if len(crews) >= 2)
    return shared / len(by_cell)


def workload_dispersion(log: RouteLog) -> float:
    """Population stddev of visit counts per crew (0 for a single crew)."""
    counts = [len(v) for v in log.visits.values()]
    if len(counts) < 2:
        return 0.0
    return statistics.pstdev(counts)


def locality_radius_miles(log: RouteLog, crew_id: str) -> float:
    """Mean distance of a crew's visited sites from their centroid."""
    if crew_id not in log.visits:
        raise UnknownCrew(f"crew {crew_id!r} not in route log")
    points = [v.to_point for v in log.visits[crew_id]]
    if not points:
        return 0.0
    center = GeoPoint(
        lat=sum(p.lat for p in points) / len(points),
        lon=sum(p.lon for p in points) / len(points),
    )
    return math.fsum(haversine_miles(center, p) for p in points) / len(points)


def catr_curve(log: RouteLog, crew_id: str) -> list[int]:
    """Cumulative customers advanced toward restoration, by visit position."""
    if crew_id not in log.visits:
        raise UnknownCrew(f"crew {crew_id!r} not in route log")
    out: list[int] = []
    total = 0
    for v in log.visits[crew_id]:
        total += v.assessed_customers
        out.append(total)
    return out


def catr_total(log: RouteLog) -> int:
    return sum(
        v.assessed_customers for visits in log.visits.values() for v in visits
    )


def metrics_report(
    test: RouteLog,
    base: RouteLog | None = None,
    crossover_tolerance_s: float = DEFAULT_CROSSOVER_TOLERANCE_S,
    raster_cell_m: float = DEFAULT_RASTER_CELL_M,
    runtime_stats: list | None = None,
) -> MetricsReport:
    """Full metric suite for one log, with savings vs an optional baseline."""
    per_crew = {cid: crew_miles(test, cid) for cid in sorted(test.visits)}
    total = math.fsum(per_crew.values())

    base_policy = base_total = saved = percent = None
    if base is not None:
        check_same_scenario(test, base)
        base_policy = base.policy
        base_total = math.fsum(crew_miles(base, cid) for cid in base.visits)
        saved, percent = reduction_stats(total, base_total)

    return MetricsReport(
        policy=test.policy,
        scenario_id=test.scenario_id,
        per_crew_miles=per_crew,
        total_miles=total,
        crossover_count=crossover_count(test, crossover_tolerance_s),
        overlap_index=overlap_index(test, raster_cell_m),
        workload_dispersion=workload_dispersion(test),
        locality_radius_miles={
            cid: locality_radius_miles(test, cid) for cid in sorted(test.visits)
        },
        base_policy=base_policy,
        base_total_miles=base_total,
        miles_saved=saved,
        percent_reduction=percent,
        runtime_stats=list(runtime_stats) if runtime_stats else [],
    )


def metrics_to_doc(report: MetricsReport, include_runtime: bool = False) -> dict:
    doc = {
        "policy": report.policy,
        "scenario_id": report.scenario_id,
        "per_crew_miles": {k: round(v, 4) for k, v in report.per_crew_miles.items()},
        "total_miles": round(report.total_miles, 4),
        "crossover_count": report.crossover_count,
        "overlap_index": round(report.overlap_index, 6),
        "workload_dispersion": round(report.workload_dispersion, 6),
        "locality_radius_miles": {
            k: round(v, 4) for k, v in report.locality_radius_miles.items()
        },
    }
    if report.base_total_miles is not None:
        doc["base_policy"] = report.base_policy
        doc["base_total_miles"] = round(report.base_total_miles, 4)
        doc["miles_saved"] = round(report.miles_saved, 4)
        doc["percent_reduction"] = round(report.percent_reduction, 4)
    if include_runtime:
        doc["runtime_stats"] = report.runtime_stats
    return doc


def metrics_csv_rows(report: MetricsReport) -> list[list]:
    """Flat rows: metric, crew, value."""
    rows: list[list] = [["metric", "crew", "value"]]
    for crew_id, miles in report.per_crew_miles.items():
        rows.append(["distance_miles", crew_id, round(miles, 4)])
    rows.append(["total_miles", "", round(report.total_miles, 4)])
    rows.append(["crossover_count", "", report.crossover_count])
    rows.append(["overlap_index", "", round(report.overlap_index, 6)])
    rows.append(["workload_dispersion", "", round(report.workload_dispersion, 6)])
    for crew_id, radius in report.locality_radius_miles.items():
        rows.append(["locality_radius_miles", crew_id, round(radius, 4)])
    if report.base_total_miles is not None:
        rows.append(["base_total_miles", "", round(report.base_total_miles, 4)])
        rows.append(["miles_saved", "", round(report.miles_saved, 4)])
        rows.append(["percent_reduction", "", round(report.percent_reduction, 4)])
    return rows
