"""Synthetic scenario generation and serialization."""
import pytest

from stormcrew.errors import InvariantError
from stormcrew.model import FPS_CATEGORIES
from stormcrew.scenario import (
    AssessModel,
    GenParams,
    Scenario,
    generate_scenario,
    load_scenario,
    save_scenario,
    scenario_from_doc,
    scenario_to_doc,
)


class TestGenerator:
    def test_same_seed_same_scenario(self):
        assert scenario_to_doc(generate_scenario(7)) == scenario_to_doc(generate_scenario(7))

    def test_different_seeds_differ(self):
        assert scenario_to_doc(generate_scenario(1)) != scenario_to_doc(generate_scenario(2))

    def test_requested_sizes(self):
        scn = generate_scenario(3, GenParams(n_crews=4, n_outages=25))
        assert len(scn.crews) == 4
        assert len(scn.tickets) == 25

    def test_stream_sorted_and_in_horizon(self):
        scn = generate_scenario(11, GenParams(n_outages=40, horizon_hours=2.0))
        times = [t.created_at for t in scn.tickets]
        assert times == sorted(times)
        assert all(scn.start <= ts <= scn.end for ts in times)

    def test_ids_unique(self):
        scn = generate_scenario(5, GenParams(n_outages=60))
        ids = [t.id for t in scn.tickets]
        assert len(set(ids)) == len(ids)

    def test_fps_fraction_respected_roughly(self):
        scn = generate_scenario(13, GenParams(n_outages=200, fps_fraction=0.10))
        n_fps = sum(1 for t in scn.tickets if t.category in FPS_CATEGORIES)
        assert 8 <= n_fps <= 32  # 10% of 200, with sampling slack

    def test_customers_in_range(self):
        scn = generate_scenario(17, GenParams(n_outages=150))
        assert all(1 <= t.customers <= 500 for t in scn.tickets)

    def test_crews_start_at_yard(self):
        scn = generate_scenario(19)
        assert all(c.anchor == scn.awc.yard for c in scn.crews)
        assert all(c.anchor_confirmed_at == scn.start for c in scn.crews)

    def test_front_loaded_profile(self):
        front = generate_scenario(23, GenParams(n_outages=200, arrival_profile="front"))
        mid = front.start + (front.end - front.start) / 2
        early = sum(1 for t in front.tickets if t.created_at <= mid)
        assert early > 120  # u^2 mapping pushes most arrivals early


class TestAssessModel:
    def test_resolution_order(self):
        from helpers import ticket
        from stormcrew.model import Category

        model = AssessModel(
            fixed_minutes=20.0,
            per_category={"Critical": 35.0},
            per_ticket={"r9": 50.0},
        )
        assert model.duration_s(ticket("r1")) == 20 * 60
        assert model.duration_s(ticket("r2", category=Category.CRITICAL)) == 35 * 60
        assert model.duration_s(ticket("r9", category=Category.CRITICAL)) == 50 * 60

    def test_default_is_twenty_minutes(self):
        from helpers import ticket

        assert AssessModel().duration_s(ticket("r1")) == 1200.0


class TestSerialization:
    def test_roundtrip(self):
        scn = generate_scenario(29, GenParams(n_crews=3, n_outages=12))
        assert scenario_from_doc(scenario_to_doc(scn)) == scn

    def test_file_roundtrip(self, tmp_path):
        scn = generate_scenario(31, GenParams(n_crews=2, n_outages=8))
        path = tmp_path / "scn.json"
        save_scenario(scn, path)
        assert load_scenario(path) == scn

    def test_save_is_byte_deterministic(self, tmp_path):
        scn = generate_scenario(37)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        save_scenario(scn, a)
        save_scenario(scn, b)
        assert a.read_bytes() == b.read_bytes()


class TestValidation:
    def test_horizon_must_be_positive(self):
        scn = generate_scenario(1, GenParams(n_outages=5))
        with pytest.raises(InvariantError):
            Scenario(
                scenario_id="bad",
                awc=scn.awc,
                start=scn.end,
                end=scn.start,
                tickets=scn.tickets,
                crews=scn.crews,
                assess=scn.assess,
                travel=scn.travel,
            )

    def test_unsorted_stream_rejected(self):
        scn = generate_scenario(1, GenParams(n_outages=5))
        shuffled = tuple(reversed(scn.tickets))
        with pytest.raises(InvariantError):
            Scenario(
                scenario_id="bad",
                awc=scn.awc,
                start=scn.start,
                end=scn.end,
                tickets=shuffled,
                crews=scn.crews,
                assess=scn.assess,
                travel=scn.travel,
            )
