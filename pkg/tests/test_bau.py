"""Baseline dispatcher: greedy nearest open ticket, no batching."""
from helpers import T0, YARD, crew, minutes, ticket
from stormcrew.bau import bau_assign


def test_picks_nearest():
    c = crew("c1")
    tickets = [ticket("far", north=2000), ticket("near", north=300)]
    assert bau_assign(c, tickets, YARD) == "near"


def test_tie_breaks_by_created_then_id():
    c = crew("c1")
    same_spot = dict(north=500)
    older = ticket("rB", created=T0 - minutes(5), **same_spot)
    newer = ticket("rA", created=T0, **same_spot)
    assert bau_assign(c, [newer, older], YARD) == "rB"

    twin_a = ticket("rA", created=T0, **same_spot)
    twin_b = ticket("rB", created=T0, **same_spot)
    assert bau_assign(c, [twin_b, twin_a], YARD) == "rA"


def test_empty_pool():
    assert bau_assign(crew("c1"), [], YARD) is None


def test_measures_from_crew_position_not_yard():
    # crew is already out at 2 km north; the 2.2 km ticket is closer to it
    # than the 500 m ticket near the yard
    c = crew("c1", north=2000)
    tickets = [ticket("near_yard", north=500), ticket("near_crew", north=2200)]
    assert bau_assign(c, tickets, YARD) == "near_crew"


def test_ignores_priority_entirely():
    from stormcrew.model import Category

    c = crew("c1")
    tickets = [
        ticket("fps_far", north=1000, category=Category.FPS1),
        ticket("small_near", north=200, customers=1),
    ]
    assert bau_assign(c, tickets, YARD) == "small_near"
