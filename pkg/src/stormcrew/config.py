"""Service configuration: defaults plus TOML file loading.

Top-level keys cover the orchestration loop (cadence, staleness, solver
mode); ``[priority]`` and ``[travel]`` tables feed the weight and travel
subsystems. Unknown keys are rejected so typos fail loudly at startup.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import tomli

from .errors import ConfigError
from .planner import PlannerConfig
from .travel import TravelConfig
from .weights import PriorityConfig

_TOP_KEYS = {
    "cadence_minutes", "staleness_seconds", "beta_dist", "force_full", "k_max",
    "host", "port", "audit_path", "auth_token", "auto_run_events",
    "lenient_snapshots", "solve_delay_seconds", "priority", "travel",
}
_PRIORITY_KEYS = {"big_m", "gamma", "q_max"}
_TRAVEL_KEYS = {
    "fallback_speed_mph", "staleness_alpha", "staleness_threshold_s",
    "router_endpoint", "router_timeout_s", "haversine_fallback",
}


@dataclass(frozen=True)
class ServiceConfig:
    """Everything the dispatch service needs at startup.

    ``staleness_seconds`` (T) bounds how old a draft may grow before
    publishing demands explicit confirmation; the default comfortably
    exceeds worst-case solve latency. ``solve_delay_seconds`` artificially
    slows solves and exists for concurrency tests only.
    """

    cadence_minutes: float = 15.0
    staleness_seconds: float = 120.0
    beta_dist: float = 1.0
    force_full: bool = True
    k_max: int = 3
    priority: PriorityConfig = field(default_factory=PriorityConfig)
    travel: TravelConfig = field(default_factory=TravelConfig)
    host: str = "127.0.0.1"
    port: int = 8080
    audit_path: str | None = None
    auth_token: str | None = None
    auto_run_events: bool = False
    lenient_snapshots: bool = False
    solve_delay_seconds: float = 0.0

    def __post_init__(self) -> None:
        if self.cadence_minutes <= 0:
            raise ConfigError(f"cadence_minutes must be positive, got {self.cadence_minutes}")
        if self.staleness_seconds <= 0:
            raise ConfigError(f"staleness_seconds must be positive, got {self.staleness_seconds}")
        if self.solve_delay_seconds < 0:
            raise ConfigError("solve_delay_seconds must be >= 0")

    def planner_config(self) -> PlannerConfig:
        return PlannerConfig(
            priority=self.priority,
            travel=self.travel,
            beta_dist=self.beta_dist,
            force_full=self.force_full,
            k_max=self.k_max,
        )


def _check_keys(table: dict, allowed: set[str], where: str) -> None:
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")


def config_from_dict(doc: dict) -> ServiceConfig:
    _check_keys(doc, _TOP_KEYS, "config")
    priority_doc = doc.get("priority", {})
    _check_keys(priority_doc, _PRIORITY_KEYS, "[priority]")
    travel_doc = doc.get("travel", {})
    _check_keys(travel_doc, _TRAVEL_KEYS, "[travel]")

    gamma = priority_doc.get("gamma", [3.0, 2.0, 1.0])
    if not (isinstance(gamma, list) and len(gamma) == 3):
        raise ConfigError(f"priority.gamma must be a 3-element list, got {gamma!r}")
    priority = PriorityConfig(
        big_m=float(priority_doc.get("big_m", 1_000_000.0)),
        gamma_fps1=float(gamma[0]),
        gamma_fps2=float(gamma[1]),
        gamma_fps3=float(gamma[2]),
        q_max=float(priority_doc.get("q_max", 100_000.0)),
    )
    travel = TravelConfig(
        fallback_speed_mph=float(travel_doc.get("fallback_speed_mph", 22.5)),
        staleness_alpha=float(travel_doc.get("staleness_alpha", 0.15)),
        staleness_threshold_s=float(travel_doc.get("staleness_threshold_s", 900.0)),
        router_endpoint=travel_doc.get("router_endpoint"),
        router_timeout_s=float(travel_doc.get("router_timeout_s", 10.0)),
        haversine_fallback=bool(travel_doc.get("haversine_fallback", True)),
    )
    return ServiceConfig(
        cadence_minutes=float(doc.get("cadence_minutes", 15.0)),
        staleness_seconds=float(doc.get("staleness_seconds", 120.0)),
        beta_dist=float(doc.get("beta_dist", 1.0)),
        force_full=bool(doc.get("force_full", True)),
        k_max=int(doc.get("k_max", 3)),
        priority=priority,
        travel=travel,
        host=str(doc.get("host", "127.0.0.1")),
        port=int(doc.get("port", 8080)),
        audit_path=doc.get("audit_path"),
        auth_token=doc.get("auth_token"),
        auto_run_events=bool(doc.get("auto_run_events", False)),
        lenient_snapshots=bool(doc.get("lenient_snapshots", False)),
        solve_delay_seconds=float(doc.get("solve_delay_seconds", 0.0)),
    )


def load_config(path: str | Path) -> ServiceConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomli.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid TOML: {exc}") from exc
    return config_from_dict(doc)
