"""Assignment solver against hand-worked examples and the exhaustive oracle.

Profits in these tests are quarter-integers, which the solver handles
exactly in float arithmetic, so objective comparisons use ``==``.
"""
import random

import pytest
from hypothesis import given, settings, strategies as st

from stormcrew.errors import InfeasibleLocks, InvariantError, TooLarge
from stormcrew.solver import (
    BRUTE_FORCE_LIMIT,
    ProfitMatrix,
    brute_force_assignment,
    profit_matrix,
    solve_assignment,
)


def pm(profits, crew_ids=None, outage_ids=None, run_index=1):
    crew_ids = crew_ids or tuple(f"c{i+1}" for i in range(len(profits)))
    outage_ids = outage_ids or tuple(f"r{j+1}" for j in range(len(profits[0])))
    return ProfitMatrix(
        crew_ids=tuple(crew_ids),
        outage_ids=tuple(outage_ids),
        profit=tuple(tuple(float(v) for v in row) for row in profits),
        beta_dist=1.0,
        run_index=run_index,
    )


class TestHandWorkedExamples:
    def test_two_by_two(self):
        # best is the diagonal: 10 + 9 = 19 (vs 3 + 8 = 11)
        asg = solve_assignment(pm([[10, 3], [8, 9]]))
        assert asg.pairs == {("c1", "r1"), ("c2", "r2")}
        assert asg.objective == 19.0

    def test_lock_overrides_profit(self):
        asg = solve_assignment(pm([[10, 3], [8, 9]]), locks={("c1", "r2")})
        assert asg.pairs == {("c1", "r2"), ("c2", "r1")}
        assert asg.objective == 11.0

    def test_rectangular_more_outages(self):
        asg = solve_assignment(pm([[1, 5, 2], [4, 3, 1]]))
        assert asg.pairs == {("c1", "r2"), ("c2", "r1")}
        assert asg.objective == 9.0

    def test_rectangular_more_crews(self):
        asg = solve_assignment(pm([[1], [4], [2]]))
        assert asg.pairs == {("c2", "r1")}
        assert asg.objective == 4.0

    def test_force_full_accepts_negative_cells(self):
        asg = solve_assignment(pm([[-5]]), force_full=True)
        assert asg.pairs == {("c1", "r1")}
        assert asg.objective == -5.0

    def test_relaxed_prefers_idle_over_negative(self):
        asg = solve_assignment(pm([[-5]]), force_full=False)
        assert asg.pairs == set()
        assert asg.objective == 0.0

    def test_relaxed_partial_idle(self):
        # c1 takes r1; every option for c2 loses money, so it idles
        asg = solve_assignment(pm([[5, -1], [-1, -1]]), force_full=False)
        assert asg.pairs == {("c1", "r1")}
        assert asg.objective == 5.0

    def test_relaxed_lock_still_binds_even_at_a_loss(self):
        asg = solve_assignment(pm([[-5]]), locks={("c1", "r1")}, force_full=False)
        assert asg.pairs == {("c1", "r1")}
        assert asg.objective == -5.0

    def test_empty_instance(self):
        empty = ProfitMatrix((), (), (), beta_dist=1.0, run_index=1)
        asg = solve_assignment(empty)
        assert asg.pairs == set() and asg.objective == 0.0


class TestCanonicalTieBreak:
    def test_two_by_two_degenerate(self):
        # both matchings score 10; canonical key picks (r1,c1),(r2,c2)
        asg = solve_assignment(pm([[5, 5], [5, 5]]))
        assert asg.pairs == {("c1", "r1"), ("c2", "r2")}

    def test_three_by_three_degenerate(self):
        asg = solve_assignment(pm([[1, 1, 1]] * 3))
        assert asg.pairs == {("c1", "r1"), ("c2", "r2"), ("c3", "r3")}

    def test_tie_broken_by_outage_then_crew(self):
        # optima pair r1 with either crew; canonical sorts by outage first,
        # so (r1, c1) beats (r1, c2)
        asg = solve_assignment(pm([[7, 3], [7, 3]]))
        assert ("c1", "r1") in asg.pairs

    def test_relaxed_degenerate_zero_matrix(self):
        # every assignment scores 0; idling everyone is canonical-smallest
        asg = solve_assignment(pm([[0, 0], [0, 0]]), force_full=False)
        assert asg.pairs == set()

    def test_matches_oracle_on_degenerate_grid(self):
        matrix = pm([[2, 2, 2], [2, 2, 2]])
        fast = solve_assignment(matrix)
        slow = brute_force_assignment(matrix)
        assert fast.pairs == slow.pairs
        assert fast.objective == slow.objective


class TestLockValidation:
    def test_unknown_crew(self):
        with pytest.raises(InfeasibleLocks):
            solve_assignment(pm([[1]]), locks={("ghost", "r1")})

    def test_unknown_outage(self):
        with pytest.raises(InfeasibleLocks):
            solve_assignment(pm([[1]]), locks={("c1", "ghost")})

    def test_crew_locked_twice(self):
        with pytest.raises(InfeasibleLocks):
            solve_assignment(
                pm([[1, 2], [3, 4]]), locks={("c1", "r1"), ("c1", "r2")}
            )

    def test_outage_locked_twice(self):
        with pytest.raises(InfeasibleLocks):
            solve_assignment(
                pm([[1, 2], [3, 4]]), locks={("c1", "r1"), ("c2", "r1")}
            )


class TestMatrixValidation:
    def test_shape_mismatch(self):
        with pytest.raises(InvariantError):
            ProfitMatrix(("c1",), ("r1", "r2"), ((1.0,),), beta_dist=1.0, run_index=1)

    def test_non_finite_profit(self):
        with pytest.raises(InvariantError):
            pm([[float("inf")]])

    def test_duplicate_ids(self):
        with pytest.raises(InvariantError):
            ProfitMatrix(("c1", "c1"), ("r1", "r2"),
                         ((1.0, 2.0), (3.0, 4.0)), beta_dist=1.0, run_index=1)

    def test_brute_force_size_cap(self):
        n = BRUTE_FORCE_LIMIT + 1
        big = pm([[1.0] * n for _ in range(n)])
        with pytest.raises(TooLarge):
            brute_force_assignment(big)


class TestOracleEquivalence:
    """Random spot checks; the full 1000-trial gate lives in acceptance."""

    def _random_pm(self, rng, force_full):
        n_c, n_r = rng.randint(1, 5), rng.randint(1, 5)
        lo = 0 if force_full else -80
        return pm(
            [[rng.randint(lo * 4, 320) / 4.0 for _ in range(n_r)] for _ in range(n_c)],
            crew_ids=tuple(f"c{i+1}" for i in range(n_c)),
            outage_ids=tuple(f"r{j+1:02d}" for j in range(n_r)),
        )

    @pytest.mark.parametrize("force_full", [True, False])
    def test_matches_brute_force(self, force_full):
        rng = random.Random(1337 if force_full else 7331)
        for _ in range(60):
            matrix = self._random_pm(rng, force_full)
            fast = solve_assignment(matrix, force_full=force_full)
            slow = brute_force_assignment(matrix, force_full=force_full)
            assert fast.pairs == slow.pairs
            assert fast.objective == slow.objective

    def test_matches_brute_force_with_locks(self):
        rng = random.Random(99)
        for _ in range(40):
            matrix = self._random_pm(rng, force_full=True)
            if len(matrix.crew_ids) < 2 or len(matrix.outage_ids) < 2:
                continue
            locks = {(matrix.crew_ids[0], matrix.outage_ids[-1])}
            fast = solve_assignment(matrix, locks=locks)
            slow = brute_force_assignment(matrix, locks=locks)
            assert fast.pairs == slow.pairs
            assert fast.objective == slow.objective


class TestStructuralProperties:
    @given(
        n_c=st.integers(1, 6),
        n_r=st.integers(1, 6),
        seed=st.integers(0, 10_000),
        force_full=st.booleans(),
    )
    @settings(max_examples=60, deadline=None)
    def test_assignment_is_a_matching(self, n_c, n_r, seed, force_full):
        rng = random.Random(seed)
        matrix = pm(
            [[rng.randint(-100, 400) / 4.0 for _ in range(n_r)] for _ in range(n_c)],
            crew_ids=tuple(f"c{i+1}" for i in range(n_c)),
            outage_ids=tuple(f"r{j+1}" for j in range(n_r)),
        )
        asg = solve_assignment(matrix, force_full=force_full)
        crews = [c for c, _ in asg.pairs]
        outages = [o for _, o in asg.pairs]
        assert len(set(crews)) == len(crews)  # one outage per crew
        assert len(set(outages)) == len(outages)  # one crew per outage
        if force_full:
            assert len(asg.pairs) == min(n_c, n_r)

    def test_locks_always_present_in_result(self):
        matrix = pm([[1, 2, 3], [6, 5, 4], [7, 8, 9]])
        locks = {("c2", "r3")}
        asg = solve_assignment(matrix, locks=locks)
        assert locks <= asg.pairs


def test_profit_matrix_builder_prices_travel_in_minutes():
    """pi = w - beta * tau_minutes, with robustification on stale anchors."""
    from helpers import T0, crew, ticket
    from stormcrew.travel import TravelConfig, TravelMatrix
    from stormcrew.weights import weigh_all

    crews = [crew("c1")]
    weighted = weigh_all([ticket("r1", customers=50)])
    matrix = TravelMatrix(
        origins=(crews[0].anchor,),
        destinations=(weighted[0].ticket.location,),
        seconds=((600.0,),),
        computed_at=T0,
        provider="haversine",
    )
    built = profit_matrix(crews, weighted, matrix, beta=2.0, run_index=1)
    assert built.profit[0][0] == pytest.approx(50.0 - 2.0 * 10.0, rel=1e-12)

    stale = profit_matrix(
        crews, weighted, matrix, beta=2.0, run_index=1,
        anchor_ages_s={"c1": 901.0}, travel_cfg=TravelConfig(),
    )
    assert stale.profit[0][0] == pytest.approx(50.0 - 2.0 * 11.5, rel=1e-12)
