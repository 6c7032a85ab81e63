"""Storm damage-assessment crew allocation.

Rolling-horizon assignment of assessment crews to outage tickets:
priority weighting, travel-time estimation with degraded-mode fallbacks,
repeated max-profit matching into short per-crew pipelines, a replay
harness with a nearest-ticket baseline for comparison, and an
operator-in-the-loop dispatch service.
"""
from .errors import (
    AwcMismatch,
    ConfigError,
    InfeasibleLocks,
    InvariantError,
    MatrixMiss,
    MismatchedScenario,
    MissingTau,
    RouterUnavailable,
    SchemaError,
    StaleRun,
    StormcrewError,
    TooLarge,
    UnknownCrew,
)
from .model import (
    AwcId,
    Category,
    CrewState,
    GeoPoint,
    OutageTicket,
    Snapshot,
    eligible_crews,
    format_rfc3339,
    merge_duplicates,
    parse_rfc3339,
    snapshot_to_doc,
    validate_snapshot,
)
from .weights import PriorityConfig, WeightedOutage, fps_indicator, weigh_all, weight
from .travel import (
    ExternalRouterProvider,
    HaversineProvider,
    OfflineMatrixProvider,
    TravelConfig,
    TravelMatrix,
    build_matrix,
    robustify,
    travel_time,
)
from .solver import (
    Assignment,
    ProfitMatrix,
    brute_force_assignment,
    profit_matrix,
    solve_assignment,
)
from .planner import (
    PlanPipelines,
    PlannerConfig,
    PlanSlot,
    apply_run,
    freeze_first,
    plan_from_doc,
    plan_pipelines,
    plan_to_doc,
)
from .scenario import (
    AssessModel,
    GenParams,
    Scenario,
    generate_scenario,
    load_scenario,
    save_scenario,
)
from .bau import bau_assign, bau_replay
from .replay import (
    POLICY_BAU,
    POLICY_OPT,
    RouteLog,
    VisitRecord,
    replay,
    routelog_from_doc,
    routelog_to_doc,
)
from .metrics import (
    MetricsReport,
    catr_curve,
    catr_total,
    crossover_count,
    metrics_report,
    metrics_to_doc,
    overlap_index,
    reduction_stats,
)
from .audit import AuditLog, read_audit
from .config import ServiceConfig, load_config

__version__ = "0.1.0"

__all__ = [
    "AwcMismatch", "ConfigError", "InfeasibleLocks", "InvariantError",
    "MatrixMiss", "MismatchedScenario", "MissingTau", "RouterUnavailable",
    "SchemaError", "StaleRun", "StormcrewError", "TooLarge", "UnknownCrew",
    "AwcId", "Category", "CrewState", "GeoPoint", "OutageTicket", "Snapshot",
    "eligible_crews", "format_rfc3339", "merge_duplicates", "parse_rfc3339",
    "snapshot_to_doc", "validate_snapshot",
    "PriorityConfig", "WeightedOutage", "fps_indicator", "weigh_all", "weight",
    "ExternalRouterProvider", "HaversineProvider", "OfflineMatrixProvider",
    "TravelConfig", "TravelMatrix", "build_matrix", "robustify", "travel_time",
    "Assignment", "ProfitMatrix", "brute_force_assignment", "profit_matrix",
    "solve_assignment",
    "PlanPipelines", "PlannerConfig", "PlanSlot", "apply_run", "freeze_first",
    "plan_from_doc", "plan_pipelines", "plan_to_doc",
    "AssessModel", "GenParams", "Scenario", "generate_scenario",
    "load_scenario", "save_scenario",
    "bau_assign", "bau_replay",
    "POLICY_BAU", "POLICY_OPT", "RouteLog", "VisitRecord", "replay",
    "routelog_from_doc", "routelog_to_doc",
    "MetricsReport", "catr_curve", "catr_total", "crossover_count",
    "metrics_report", "metrics_to_doc", "overlap_index", "reduction_stats",
    "AuditLog", "read_audit",
    "ServiceConfig", "load_config",
    "__version__",
]
