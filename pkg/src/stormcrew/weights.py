"""Per-outage priority weights.

Fire/police/safety (FPS) tickets get a large tier weight M * gamma so they
dominate every other ticket regardless of customer count; everything else
is weighted by affected customers. The dominance guarantee is checked at
configuration time, not trusted.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError
from .model import Category, OutageTicket

DEFAULT_BIG_M = 1_000_000.0
DEFAULT_GAMMA = (3.0, 2.0, 1.0)
DEFAULT_Q_MAX = 100_000.0


@dataclass(frozen=True)
class PriorityConfig:
    """Weight coefficients. Defaults keep FPS3 three orders above q_max.

    ``category_multiplier`` scales non-FPS customer weights per category;
    all default to 1.0 and this is an extension hook, not core behavior.
    """

    big_m: float = DEFAULT_BIG_M
    gamma_fps1: float = DEFAULT_GAMMA[0]
    gamma_fps2: float = DEFAULT_GAMMA[1]
    gamma_fps3: float = DEFAULT_GAMMA[2]
    q_max: float = DEFAULT_Q_MAX
    category_multiplier: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.big_m <= 0:
            raise ConfigError(f"big_m must be positive, got {self.big_m}")
        if not self.gamma_fps1 > self.gamma_fps2 > self.gamma_fps3 > 0:
            raise ConfigError(
                "gamma tiers must be strictly decreasing and positive, got "
                f"({self.gamma_fps1}, {self.gamma_fps2}, {self.gamma_fps3})"
            )
        if self.q_max <= 0:
            raise ConfigError(f"q_max must be positive, got {self.q_max}")
        # Dominance guarantee: the weakest FPS tier must beat the largest
        # admissible customer count.
        if self.big_m * self.gamma_fps3 <= self.q_max:
            raise ConfigError(
                f"big_m * gamma_fps3 = {self.big_m * self.gamma_fps3} must exceed "
                f"q_max = {self.q_max}; FPS dominance would break"
            )
        for name, mult in self.category_multiplier.items():
            if name not in Category._value2member_map_:
                raise ConfigError(f"unknown category in multiplier map: {name!r}")
            if mult <= 0:
                raise ConfigError(f"category multiplier for {name} must be positive")

    def gamma_for(self, category: Category) -> float:
        if category is Category.FPS1:
            return self.gamma_fps1
        if category is Category.FPS2:
            return self.gamma_fps2
        if category is Category.FPS3:
            return self.gamma_fps3
        raise ConfigError(f"no gamma tier for non-FPS category {category.value}")


@dataclass(frozen=True)
class WeightedOutage:
    """A ticket together with its FPS indicator and computed weight."""

    ticket: OutageTicket
    y: int
    weight: float


def fps_indicator(ticket: OutageTicket) -> int:
    """1 when the ticket is FPS1/FPS2/FPS3, else 0."""
    return 1 if ticket.is_fps else 0


def weight(ticket: OutageTicket, cfg: PriorityConfig | None = None) -> WeightedOutage:
    """Compute the priority weight for one ticket.

    FPS tickets: w = M * gamma_tier (customer count deliberately ignored).
    Everything else: w = customers, optionally scaled by a per-category
    multiplier (default 1).
    """
    if cfg is None:
        cfg = PriorityConfig()
    y = fps_indicator(ticket)
    if y:
        w = cfg.big_m * cfg.gamma_for(ticket.category)
    else:
        mult = cfg.category_multiplier.get(ticket.category.value, 1.0)
        w = float(ticket.customers) * mult
    return WeightedOutage(ticket=ticket, y=y, weight=w)


def weigh_all(tickets, cfg: PriorityConfig | None = None) -> list[WeightedOutage]:
    """Weight a batch of tickets, preserving input order."""
    if cfg is None:
        cfg = PriorityConfig()
    return [weight(t, cfg) for t in tickets]
