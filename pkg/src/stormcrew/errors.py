"""Exception types shared across the package."""


class StormcrewError(Exception):
    """Base class for all package errors."""


# -- snapshot ingestion ------------------------------------------------------

class SchemaError(StormcrewError):
    """Document does not match the snapshot wire schema."""


class InvariantError(StormcrewError):
    """Document parses but violates a domain invariant."""


class AwcMismatch(StormcrewError):
    """Ticket or crew belongs to a different area work center."""


# -- configuration -----------------------------------------------------------

class ConfigError(StormcrewError):
    """Configuration values violate their invariants."""


# -- travel providers --------------------------------------------------------

class RouterUnavailable(StormcrewError):
    """External routing service failed or timed out."""


class MatrixMiss(StormcrewError):
    """Point not covered by the offline travel matrix."""


# -- assignment solver -------------------------------------------------------

class MissingTau(StormcrewError):
    """Travel time unavailable for a crew/outage pair."""


class InfeasibleLocks(StormcrewError):
    """Operator locks conflict with each other or the instance."""


class TooLarge(StormcrewError):
    """Instance exceeds the brute-force enumeration bound."""


# -- rolling planner ---------------------------------------------------------

class StaleRun(StormcrewError):
    """Assignment applied to a planner state with a different run index."""


# -- replay and metrics ------------------------------------------------------

class MismatchedScenario(StormcrewError):
    """Route logs being compared do not come from the same scenario."""


class UnknownCrew(StormcrewError):
    """Crew id not present in the route log."""
