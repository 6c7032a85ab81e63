"""Single-run crew-to-outage matching.

Builds the per-run profit matrix (priority weight minus travel cost) and
solves the constrained maximum-profit bipartite matching with operator
locks pre-fixed. Two independent implementations are provided:

* :func:`solve_assignment` — augmenting-path shortest-path assignment
  (Jonker-Volgenant style with potentials), O(n^2 m) worst case.
* :func:`brute_force_assignment` — exhaustive enumeration, capped at 8x8,
  kept as a permanent cross-check.

Both apply the identical deterministic tie-break among equal-profit
optima: the assignment whose sorted (outage id, crew id) pair tuple is
lexicographically smallest. Objectives are computed with ``math.fsum``
(order-independent, correctly rounded) so the two routes agree on float
equality whenever profits are exactly representable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError, InfeasibleLocks, MissingTau, TooLarge
from .errors import InvariantError
from .model import CrewState
from .travel import TravelConfig, TravelMatrix, robustify
from .weights import WeightedOutage

BRUTE_FORCE_LIMIT = 8


@dataclass(frozen=True)
class ProfitMatrix:
    """Profit of sending each eligible crew to each candidate outage."""

    crew_ids: tuple[str, ...]
    outage_ids: tuple[str, ...]
    profit: tuple[tuple[float, ...], ...]
    beta_dist: float
    run_index: int

    def __post_init__(self) -> None:
        if self.beta_dist <= 0:
            raise ConfigError(f"beta_dist must be positive, got {self.beta_dist}")
        if self.run_index < 1:
            raise ConfigError(f"run_index must be >= 1, got {self.run_index}")
        if len(set(self.crew_ids)) != len(self.crew_ids):
            raise InvariantError("duplicate crew ids in profit matrix")
        if len(set(self.outage_ids)) != len(self.outage_ids):
            raise InvariantError("duplicate outage ids in profit matrix")
        if len(self.profit) != len(self.crew_ids):
            raise InvariantError("profit row count does not match crew count")
        for row in self.profit:
            if len(row) != len(self.outage_ids):
                raise InvariantError("profit column count does not match outage count")
            for value in row:
                if not math.isfinite(value):
                    raise InvariantError(f"profit entries must be finite, got {value}")

    def value(self, crew_id: str, outage_id: str) -> float:
        return self.profit[self.crew_ids.index(crew_id)][self.outage_ids.index(outage_id)]


@dataclass(frozen=True)
class Assignment:
    """One run's matching: pairs of (crew id, outage id) plus total profit."""

    pairs: frozenset[tuple[str, str]]
    objective: float
    run_index: int
    provenance: dict = field(compare=False, default_factory=dict)

    def canonical_pairs(self) -> list[tuple[str, str]]:
        """Pairs sorted by (outage id, crew id) — the audit/tie-break order."""
        return sorted(self.pairs, key=lambda p: (p[1], p[0]))


def profit_matrix(
    crews,
    outages,
    matrix: TravelMatrix,
    beta: float,
    run_index: int,
    anchor_ages_s: dict[str, float] | None = None,
    travel_cfg: TravelConfig | None = None,
) -> ProfitMatrix:
    """Profit = weight - beta * travel minutes, per crew x outage pair.

    ``matrix`` rows must align with ``crews`` and columns with ``outages``.
    When ``anchor_ages_s`` and ``travel_cfg`` are given, each crew's travel
    estimates are inflated for anchor staleness before pricing.
    """
    crews = list(crews)
    outages = list(outages)
    for crew in crews:
        if not isinstance(crew, CrewState):
            raise InvariantError(f"expected CrewState, got {type(crew).__name__}")
        if crew.frozen:
            raise InvariantError(f"frozen crew {crew.id} reached the solver")
    for wo in outages:
        if not isinstance(wo, WeightedOutage):
            raise InvariantError(f"expected WeightedOutage, got {type(wo).__name__}")
    if len(matrix.seconds) != len(crews) or any(
        len(row) != len(outages) for row in matrix.seconds
    ):
        raise MissingTau(
            f"travel matrix is {len(matrix.seconds)}x"
            f"{len(matrix.seconds[0]) if matrix.seconds else 0}, "
            f"need {len(crews)}x{len(outages)}"
        )
    ages = anchor_ages_s or {}
    rows: list[tuple[float, ...]] = []
    for i, crew in enumerate(crews):
        age = ages.get(crew.id, 0.0)
        row: list[float] = []
        for j, wo in enumerate(outages):
            tau = matrix.seconds[i][j]
            if travel_cfg is not None:
                tau = robustify(tau, age, travel_cfg)
            row.append(wo.weight - beta * (tau / 60.0))
        rows.append(tuple(row))
    return ProfitMatrix(
        crew_ids=tuple(c.id for c in crews),
        outage_ids=tuple(wo.ticket.id for wo in outages),
        profit=tuple(rows),
        beta_dist=beta,
        run_index=run_index,
    )


def _canonical_key(pairs) -> tuple[tuple[str, str], ...]:
    return tuple(sorted((o, c) for c, o in pairs))


def _validate_locks(pm: ProfitMatrix, locks) -> list[tuple[str, str]]:
    crew_set = set(pm.crew_ids)
    outage_set = set(pm.outage_ids)
    seen_crews: set[str] = set()
    seen_outages: set[str] = set()
    ordered = sorted(locks, key=lambda p: (p[1], p[0]))
    for crew_id, outage_id in ordered:
        if crew_id not in crew_set:
            raise InfeasibleLocks(f"lock references unknown crew {crew_id!r}")
        if outage_id not in outage_set:
            raise InfeasibleLocks(f"lock references unknown outage {outage_id!r}")
        if crew_id in seen_crews:
            raise InfeasibleLocks(f"two locks share crew {crew_id!r}")
        if outage_id in seen_outages:
            raise InfeasibleLocks(f"two locks share outage {outage_id!r}")
        seen_crews.add(crew_id)
        seen_outages.add(outage_id)
    return ordered


def _jv_min_cost(cost: list[list[float]]) -> list[int]:
    """Min-cost full assignment of all rows; requires rows <= columns.

    Shortest augmenting paths with dual potentials; exact on inputs whose
    entries are binary-representable (sums and differences stay exact).
    Returns the column index chosen for each row.
    """
    n = len(cost)
    m = len(cost[0])
    u = [0.0] * (n + 1)
    v = [0.0] * (m + 1)
    match = [0] * (m + 1)  # match[j] = row occupying column j, 1-based, 0 free
    way = [0] * (m + 1)
    for i in range(1, n + 1):
        match[0] = i
        j0 = 0
        minv = [math.inf] * (m + 1)
        used = [False] * (m + 1)
        while True:
            used[j0] = True
            i0 = match[j0]
            delta = math.inf
            j1 = 0
            row = cost[i0 - 1]
            for j in range(1, m + 1):
                if used[j]:
                    continue
                cur = row[j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[match[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1
    out = [-1] * n
    for j in range(1, m + 1):
        if match[j]:
            out[match[j] - 1] = j - 1
    return out


def _solve_reduced(
    pm: ProfitMatrix,
    fixed: list[tuple[str, str]],
    force_full: bool,
) -> tuple[float, frozenset[tuple[str, str]]]:
    """Optimal matching value and one witness, with ``fixed`` pairs forced."""
    fixed_crews = {c for c, _ in fixed}
    fixed_outages = {o for _, o in fixed}
    free_rows = [i for i, c in enumerate(pm.crew_ids) if c not in fixed_crews]
    free_cols = [j for j, o in enumerate(pm.outage_ids) if o not in fixed_outages]

    chosen: list[tuple[str, str]] = []
    if free_rows and free_cols:
        if force_full:
            # Full matching on the smaller side; transpose when crews exceed
            # outages so the JV row-saturation requirement holds.
            if len(free_rows) <= len(free_cols):
                cost = [
                    [-pm.profit[i][j] for j in free_cols]
                    for i in free_rows
                ]
                cols_for_rows = _jv_min_cost(cost)
                for r, jc in enumerate(cols_for_rows):
                    chosen.append((pm.crew_ids[free_rows[r]], pm.outage_ids[free_cols[jc]]))
            else:
                cost = [
                    [-pm.profit[i][j] for i in free_rows]
                    for j in free_cols
                ]
                rows_for_cols = _jv_min_cost(cost)
                for cidx, ir in enumerate(rows_for_cols):
                    chosen.append((pm.crew_ids[free_rows[ir]], pm.outage_ids[free_cols[cidx]]))
        else:
            # Relaxed mode: one zero-cost idle column per row so any crew
            # whose best real profit is negative can stay unassigned.
            n_real = len(free_cols)
            cost = [
                [-pm.profit[i][j] for j in free_cols] + [0.0] * len(free_rows)
                for i in free_rows
            ]
            cols_for_rows = _jv_min_cost(cost)
            for r, jc in enumerate(cols_for_rows):
                if jc < n_real:
                    chosen.append((pm.crew_ids[free_rows[r]], pm.outage_ids[free_cols[jc]]))

    pairs = frozenset(fixed) | frozenset(chosen)
    value = math.fsum(pm.value(c, o) for c, o in sorted(pairs))
    return value, pairs


def _pairs_value(pm: ProfitMatrix, pairs) -> float:
    return math.fsum(pm.value(c, o) for c, o in sorted(pairs))


def solve_assignment(
    pm: ProfitMatrix,
    locks=frozenset(),
    force_full: bool = True,
) -> Assignment:
    """Maximum-profit matching with locks forced in.

    Each crew takes at most one outage and each outage at most one crew.
    ``force_full=True`` assigns min(crews, outages) pairs even at negative
    profit; ``force_full=False`` lets a crew idle when every remaining
    profit is negative. Among equal-profit optima the result is the one
    whose sorted (outage id, crew id) tuple is lexicographically smallest,
    found by greedy lock-and-resolve probing.

    Empty crew or outage lists yield an empty assignment, not an error.
    """
    ordered_locks = _validate_locks(pm, locks)
    provenance: dict = {
        "locks": [list(p) for p in ordered_locks],
        "tie_breaks": [],
    }
    if not pm.crew_ids or not pm.outage_ids:
        return Assignment(
            pairs=frozenset(),
            objective=0.0,
            run_index=pm.run_index,
            provenance=provenance,
        )

    best_value, witness = _solve_reduced(pm, ordered_locks, force_full)
    target = min(len(pm.crew_ids), len(pm.outage_ids)) if force_full else None

    fixed: list[tuple[str, str]] = list(ordered_locks)
    fixed_crews = {c for c, _ in fixed}
    fixed_outages = {o for _, o in fixed}
    candidates = sorted(
        ((o, c) for c in pm.crew_ids for o in pm.outage_ids),
    )

    for outage_id, crew_id in candidates:
        if target is not None:
            if len(fixed) == target:
                break
        elif _pairs_value(pm, fixed) == best_value:
            # Relaxed mode: a shorter pair tuple is lexicographically
            # smaller, so stop as soon as the fixed set alone is optimal.
            break
        if crew_id in fixed_crews or outage_id in fixed_outages:
            continue
        pair = (crew_id, outage_id)
        if pair in witness:
            fixed.append(pair)
            fixed_crews.add(crew_id)
            fixed_outages.add(outage_id)
            continue
        value, candidate_witness = _solve_reduced(pm, fixed + [pair], force_full)
        if value == best_value:
            fixed.append(pair)
            fixed_crews.add(crew_id)
            fixed_outages.add(outage_id)
            witness = candidate_witness
            provenance["tie_breaks"].append([crew_id, outage_id])

    pairs = frozenset(fixed)
    return Assignment(
        pairs=pairs,
        objective=_pairs_value(pm, pairs),
        run_index=pm.run_index,
        provenance=provenance,
    )


def brute_force_assignment(
    pm: ProfitMatrix,
    locks=frozenset(),
    force_full: bool = True,
) -> Assignment:
    """Exhaustive reference solver, capped at 8 crews x 8 outages.

    Enumerates every feasible matching honoring the locks and picks the
    maximum total profit, breaking ties by the same canonical pair order
    as :func:`solve_assignment`.
    """
    n_crews = len(pm.crew_ids)
    n_outages = len(pm.outage_ids)
    if n_crews > BRUTE_FORCE_LIMIT or n_outages > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"brute force capped at {BRUTE_FORCE_LIMIT}x{BRUTE_FORCE_LIMIT}")
    ordered_locks = _validate_locks(pm, locks)
    provenance: dict = {"locks": [list(p) for p in ordered_locks], "tie_breaks": []}
    if n_crews == 0 or n_outages == 0:
        return Assignment(
            pairs=frozenset(),
            objective=0.0,
            run_index=pm.run_index,
            provenance=provenance,
        )

    fixed_crews = {c for c, _ in ordered_locks}
    fixed_outages = {o for _, o in ordered_locks}
    free_rows = [i for i, c in enumerate(pm.crew_ids) if c not in fixed_crews]
    free_cols = [j for j, o in enumerate(pm.outage_ids) if o not in fixed_outages]
    target = min(n_crews, n_outages) - len(ordered_locks) if force_full else None

    best: tuple[float, tuple, frozenset] | None = None

    def consider(chosen: list[tuple[str, str]]) -> None:
        nonlocal best
        pairs = frozenset(ordered_locks) | frozenset(chosen)
        value = _pairs_value(pm, pairs)
        key = _canonical_key(pairs)
        if best is None or value > best[0] or (value == best[0] and key < best[1]):
            best = (value, key, pairs)

    def dfs(row_pos: int, used_cols: set[int], chosen: list[tuple[str, str]]) -> None:
        remaining_rows = len(free_rows) - row_pos
        if target is not None:
            needed = target - len(chosen)
            if needed > remaining_rows:
                return  # cannot reach required cardinality
        if row_pos == len(free_rows):
            if target is None or len(chosen) == target:
                consider(chosen)
            return
        i = free_rows[row_pos]
        # branch: leave this crew idle
        dfs(row_pos + 1, used_cols, chosen)
        for j in free_cols:
            if j in used_cols:
                continue
            chosen.append((pm.crew_ids[i], pm.outage_ids[j]))
            used_cols.add(j)
            dfs(row_pos + 1, used_cols, chosen)
            used_cols.discard(j)
            chosen.pop()

    dfs(0, set(), [])
    assert best is not None
    return Assignment(
        pairs=best[2],
        objective=best[0],
        run_index=pm.run_index,
        provenance=provenance,
    )
