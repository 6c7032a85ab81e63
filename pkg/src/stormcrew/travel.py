"""Travel-time providers and staleness robustification.

Three interchangeable providers produce pairwise travel seconds:

* ``HaversineProvider`` — great-circle distance over a constant storm-mode
  speed. Always available; the fallback of last resort.
* ``OfflineMatrixProvider`` — precomputed road-network matrix loaded from
  CSV, with nearest-node snapping. Blocked roads arrive as ``inf`` cells
  and are clamped to a large finite penalty so downstream profit values
  stay finite.
* ``ExternalRouterProvider`` — HTTP distance-matrix service. Failures are
  recoverable: ``build_matrix`` fills failed cells from haversine and flags
  them so callers can tell estimated cells from routed ones.

Crew anchors can be stale (no live GPS); ``robustify`` inflates estimates
whose origin anchor is older than a threshold.
"""
from __future__ import annotations

import csv
import logging
import math
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

import requests

from .errors import ConfigError, MatrixMiss, RouterUnavailable
from .geo import METERS_PER_MILE, haversine_m
from .model import GeoPoint

logger = logging.getLogger(__name__)

ROUTER_API_KEY_ENV = "ROUTER_API_KEY"

# Stand-in for an impassable (blocked) road cell: one week of driving.
# Kept finite so profit arithmetic never sees inf.
BLOCKED_SECONDS = 7 * 24 * 3600.0

DEFAULT_SNAP_RADIUS_M = 1000.0


class Provider(str, Enum):
    HAVERSINE = "Haversine"
    OFFLINE_MATRIX = "OfflineMatrix"
    EXTERNAL_ROUTER = "ExternalRouter"


@dataclass(frozen=True)
class TravelConfig:
    """Tuning knobs for travel estimation.

    ``fallback_speed_mph`` defaults to 22.5, the midpoint of observed
    storm-mode crew speeds (20 to 25 mph). ``staleness_threshold_s``
    defaults to one planning cadence (15 min).
    """

    fallback_speed_mph: float = 22.5
    staleness_alpha: float = 0.15
    staleness_threshold_s: float = 900.0
    router_endpoint: str | None = None
    router_timeout_s: float = 10.0
    haversine_fallback: bool = True

    def __post_init__(self) -> None:
        if not 5.0 <= self.fallback_speed_mph <= 80.0:
            raise ConfigError(
                f"fallback_speed_mph must be in [5, 80], got {self.fallback_speed_mph}"
            )
        if self.staleness_alpha < 0:
            raise ConfigError(f"staleness_alpha must be >= 0, got {self.staleness_alpha}")
        if self.staleness_threshold_s <= 0:
            raise ConfigError(
                f"staleness_threshold_s must be positive, got {self.staleness_threshold_s}"
            )
        if self.router_timeout_s <= 0:
            raise ConfigError(f"router_timeout_s must be positive, got {self.router_timeout_s}")

    @property
    def fallback_speed_mps(self) -> float:
        return self.fallback_speed_mph * METERS_PER_MILE / 3600.0


@dataclass(frozen=True)
class TravelMatrix:
    """Pairwise travel seconds for one solver run. Immutable once built.

    ``fallback_cells`` marks (i, j) positions whose value came from the
    haversine fallback rather than the requested provider.
    """

    origins: tuple[GeoPoint, ...]
    destinations: tuple[GeoPoint, ...]
    seconds: tuple[tuple[float, ...], ...]
    computed_at: datetime
    provider: Provider
    fallback_cells: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self) -> None:
        if len(self.seconds) != len(self.origins):
            raise ConfigError("matrix row count does not match origin count")
        for row in self.seconds:
            if len(row) != len(self.destinations):
                raise ConfigError("matrix column count does not match destination count")
            for value in row:
                if not (math.isfinite(value) and value >= 0):
                    raise ConfigError(f"travel seconds must be finite and >= 0, got {value}")


class HaversineProvider:
    """Great-circle distance over a constant fallback speed."""

    name = Provider.HAVERSINE

    def __init__(self, cfg: TravelConfig | None = None) -> None:
        self.cfg = cfg or TravelConfig()

    def matrix(self, origins, destinations) -> list[list[float | None]]:
        speed = self.cfg.fallback_speed_mps
        return [[haversine_m(a, b) / speed for b in destinations] for a in origins]


class OfflineMatrixProvider:
    """Precomputed road matrix with nearest-node snapping.

    Points farther than ``snap_radius_m`` from every node, and node pairs
    absent from the matrix, yield ``None`` cells (the caller decides whether
    to fall back or fail).
    """

    name = Provider.OFFLINE_MATRIX

    def __init__(
        self,
        nodes: dict[str, GeoPoint],
        entries: dict[tuple[str, str], float],
        snap_radius_m: float = DEFAULT_SNAP_RADIUS_M,
    ) -> None:
        if not nodes:
            raise ConfigError("offline matrix needs at least one node")
        self.nodes = dict(nodes)
        self.entries = dict(entries)
        self.snap_radius_m = snap_radius_m
        self._node_items = sorted(self.nodes.items())

    @classmethod
    def from_files(
        cls,
        nodes_path: str | Path,
        matrix_path: str | Path,
        snap_radius_m: float = DEFAULT_SNAP_RADIUS_M,
    ) -> "OfflineMatrixProvider":
        """Load `node_id,lat,lon` and `from_id,to_id,seconds` CSV files.

        ``inf`` in the seconds column marks a blocked pair and is clamped
        to a large finite penalty.
        """
        nodes: dict[str, GeoPoint] = {}
        with open(nodes_path, newline="") as fh:
            for row in csv.DictReader(fh):
                try:
                    nodes[row["node_id"]] = GeoPoint(float(row["lat"]), float(row["lon"]))
                except (KeyError, ValueError) as exc:
                    raise ConfigError(f"bad node row {row!r} in {nodes_path}") from exc
        entries: dict[tuple[str, str], float] = {}
        with open(matrix_path, newline="") as fh:
            for row in csv.DictReader(fh):
                try:
                    seconds = float(row["seconds"])
                except (KeyError, ValueError) as exc:
                    raise ConfigError(f"bad matrix row {row!r} in {matrix_path}") from exc
                if math.isinf(seconds):
                    seconds = BLOCKED_SECONDS
                if seconds < 0:
                    raise ConfigError(f"negative seconds in matrix row {row!r}")
                from_id, to_id = row["from_id"], row["to_id"]
                if from_id not in nodes or to_id not in nodes:
                    raise ConfigError(f"matrix row {row!r} references unknown node")
                entries[(from_id, to_id)] = seconds
        return cls(nodes, entries, snap_radius_m)

    def snap(self, point: GeoPoint) -> str | None:
        """Nearest node id within the snap radius, or None."""
        best_id, best_d = None, math.inf
        for node_id, node_pt in self._node_items:
            d = haversine_m(point, node_pt)
            if d < best_d:
                best_id, best_d = node_id, d
        return best_id if best_d <= self.snap_radius_m else None

    def matrix(self, origins, destinations) -> list[list[float | None]]:
        o_nodes = [self.snap(p) for p in origins]
        d_nodes = [self.snap(p) for p in destinations]
        out: list[list[float | None]] = []
        for o in o_nodes:
            row: list[float | None] = []
            for d in d_nodes:
                if o is None or d is None:
                    row.append(None)
                elif o == d:
                    row.append(self.entries.get((o, d), 0.0))
                else:
                    row.append(self.entries.get((o, d)))
            out.append(row)
        return out


class ExternalRouterProvider:
    """Client for the HTTP distance-matrix contract.

    POSTs ``{origins: [{lat, lon}], destinations: [{lat, lon}]}`` and
    expects ``{seconds: [[...]]}``; a null cell means the router could not
    route that pair. The bearer token, if any, comes from the
    ``ROUTER_API_KEY`` environment variable.
    """

    name = Provider.EXTERNAL_ROUTER

    def __init__(self, cfg: TravelConfig, session: requests.Session | None = None) -> None:
        if not cfg.router_endpoint:
            raise ConfigError("external router provider requires router_endpoint")
        self.cfg = cfg
        self._session = session or requests.Session()

    def matrix(self, origins, destinations) -> list[list[float | None]]:
        payload = {
            "origins": [{"lat": p.lat, "lon": p.lon} for p in origins],
            "destinations": [{"lat": p.lat, "lon": p.lon} for p in destinations],
        }
        headers = {}
        token = os.environ.get(ROUTER_API_KEY_ENV)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        try:
            resp = self._session.post(
                self.cfg.router_endpoint,
                json=payload,
                headers=headers,
                timeout=self.cfg.router_timeout_s,
            )
            resp.raise_for_status()
            body = resp.json()
        except (requests.RequestException, ValueError) as exc:
            raise RouterUnavailable(f"router request failed: {exc}") from exc
        seconds = body.get("seconds") if isinstance(body, dict) else None
        if not isinstance(seconds, list) or len(seconds) != len(origins):
            raise RouterUnavailable(f"router returned malformed matrix: {body!r}")
        out: list[list[float | None]] = []
        for row in seconds:
            if not isinstance(row, list) or len(row) != len(destinations):
                raise RouterUnavailable(f"router returned malformed matrix row: {row!r}")
            cells: list[float | None] = []
            for value in row:
                if value is None:
                    cells.append(None)
                elif isinstance(value, (int, float)) and not isinstance(value, bool) \
                        and math.isfinite(value) and value >= 0:
                    cells.append(float(value))
                else:
                    raise RouterUnavailable(f"router returned bad cell value: {value!r}")
            out.append(cells)
        return out


TravelProvider = HaversineProvider | OfflineMatrixProvider | ExternalRouterProvider


def travel_time(
    origin: GeoPoint,
    destination: GeoPoint,
    cfg: TravelConfig,
    provider: TravelProvider | None = None,
) -> float:
    """Travel seconds for a single pair via the given provider.

    Unlike :func:`build_matrix` this does not fall back on failure; a cell
    the provider cannot produce raises the provider-appropriate error.
    """
    if provider is None:
        provider = HaversineProvider(cfg)
    cell = provider.matrix([origin], [destination])[0][0]
    if cell is None:
        if provider.name is Provider.OFFLINE_MATRIX:
            raise MatrixMiss(
                f"no matrix coverage for ({origin.lat:.5f},{origin.lon:.5f}) -> "
                f"({destination.lat:.5f},{destination.lon:.5f})"
            )
        raise RouterUnavailable("router returned no value for the requested pair")
    return cell


def robustify(tau: float, anchor_age_s: float, cfg: TravelConfig) -> float:
    """Inflate a travel estimate when the origin anchor is stale.

    Past the staleness threshold the estimate grows by a multiplicative
    margin (1 + alpha); fresh anchors pass through unchanged. Monotone
    non-decreasing in age; never decreases tau.
    """
    if tau < 0:
        raise ConfigError(f"tau must be >= 0, got {tau}")
    if anchor_age_s > cfg.staleness_threshold_s:
        return tau * (1.0 + cfg.staleness_alpha)
    return tau


def build_matrix(
    origins,
    destinations,
    cfg: TravelConfig,
    provider: TravelProvider | None = None,
    computed_at: datetime | None = None,
) -> TravelMatrix:
    """Batched travel matrix over all origin x destination pairs.

    Cells the provider cannot produce (router outage, unroutable pair,
    off-matrix point) are filled from haversine and flagged in
    ``fallback_cells`` when ``cfg.haversine_fallback`` is set; otherwise
    the provider's error propagates.
    """
    origins = tuple(origins)
    destinations = tuple(destinations)
    if not origins or not destinations:
        raise ConfigError("build_matrix needs non-empty origins and destinations")
    if provider is None:
        provider = HaversineProvider(cfg)

    try:
        raw = provider.matrix(origins, destinations)
    except (RouterUnavailable, MatrixMiss) as exc:
        if not cfg.haversine_fallback:
            raise
        logger.warning("travel provider failed (%s); whole matrix from haversine", exc)
        raw = [[None] * len(destinations) for _ in origins]

    fallback = HaversineProvider(cfg)
    filled: list[tuple[float, ...]] = []
    flagged: set[tuple[int, int]] = set()
    for i, row in enumerate(raw):
        cells: list[float] = []
        for j, value in enumerate(row):
            if value is None:
                if not cfg.haversine_fallback:
                    if provider.name is Provider.OFFLINE_MATRIX:
                        raise MatrixMiss(f"no matrix coverage for cell ({i},{j})")
                    raise RouterUnavailable(f"router returned no value for cell ({i},{j})")
                value = fallback.matrix([origins[i]], [destinations[j]])[0][0]
                flagged.add((i, j))
            cells.append(value)
        filled.append(tuple(cells))

    if flagged:
        logger.info("filled %d/%d travel cells from haversine fallback",
                    len(flagged), len(origins) * len(destinations))
    return TravelMatrix(
        origins=origins,
        destinations=destinations,
        seconds=tuple(filled),
        computed_at=computed_at or datetime.now(timezone.utc),
        provider=provider.name,
        fallback_cells=frozenset(flagged),
    )
