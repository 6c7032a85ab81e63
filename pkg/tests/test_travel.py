"""Travel-time providers, robustification, and degraded-mode fallbacks."""
import math

import pytest

from helpers import MPH_TO_MPS, YARD, pt
from stormcrew.errors import ConfigError, InvariantError, MatrixMiss, RouterUnavailable
from stormcrew.geo import haversine_m
from stormcrew.model import GeoPoint
from stormcrew.stubrouter import StubRouterServer
from stormcrew.travel import (
    BLOCKED_SECONDS,
    ROUTER_API_KEY_ENV,
    ExternalRouterProvider,
    HaversineProvider,
    OfflineMatrixProvider,
    TravelConfig,
    build_matrix,
    robustify,
    travel_time,
)


class TestConfig:
    def test_speed_bounds(self):
        with pytest.raises(ConfigError):
            TravelConfig(fallback_speed_mph=4.0)
        with pytest.raises(ConfigError):
            TravelConfig(fallback_speed_mph=81.0)

    def test_speed_conversion(self):
        cfg = TravelConfig(fallback_speed_mph=22.5)
        assert cfg.fallback_speed_mps == pytest.approx(22.5 * MPH_TO_MPS, rel=1e-12)


class TestHaversineProvider:
    def test_seconds_are_distance_over_speed(self):
        cfg = TravelConfig()
        origin = YARD
        dest = pt(0, 10_058.4)  # exactly 1000 s at 22.5 mph
        tau = travel_time(origin, dest, cfg)
        assert tau == pytest.approx(10_058.4 / (22.5 * MPH_TO_MPS), rel=1e-9)
        assert tau == pytest.approx(1000.0, rel=1e-9)

    def test_matrix_shape(self):
        cfg = TravelConfig()
        m = HaversineProvider(cfg).matrix([YARD, pt(0, 500)], [pt(0, 450)])
        assert len(m) == 2 and len(m[0]) == 1
        assert m[1][0] < m[0][0]  # the closer origin gets the shorter time


class TestRobustify:
    def test_fresh_anchor_untouched(self):
        cfg = TravelConfig()
        assert robustify(100.0, 0.0, cfg) == 100.0
        assert robustify(100.0, 900.0, cfg) == 100.0  # boundary is strict

    def test_stale_anchor_inflated(self):
        cfg = TravelConfig()
        assert robustify(100.0, 900.1, cfg) == pytest.approx(115.0, rel=1e-9)

    def test_custom_alpha(self):
        cfg = TravelConfig(staleness_alpha=0.5, staleness_threshold_s=60.0)
        assert robustify(200.0, 61.0, cfg) == pytest.approx(300.0, rel=1e-9)


class TestOfflineMatrix:
    @pytest.fixture()
    def files(self, tmp_path):
        nodes = tmp_path / "nodes.csv"
        matrix = tmp_path / "matrix.csv"
        a, b = YARD, pt(0, 3000)
        nodes.write_text(
            "node_id,lat,lon\n"
            f"A,{a.lat},{a.lon}\n"
            f"B,{b.lat},{b.lon}\n"
        )
        matrix.write_text(
            "from_id,to_id,seconds\n"
            "A,B,240\n"
            "B,A,inf\n"
        )
        return nodes, matrix

    def test_exact_pair(self, files):
        provider = OfflineMatrixProvider.from_files(*files)
        cfg = TravelConfig()
        assert travel_time(YARD, pt(0, 3000), cfg, provider) == 240.0

    def test_blocked_pair_is_large_finite(self, files):
        provider = OfflineMatrixProvider.from_files(*files)
        cfg = TravelConfig()
        assert travel_time(pt(0, 3000), YARD, cfg, provider) == BLOCKED_SECONDS

    def test_snapping_within_radius(self, files):
        provider = OfflineMatrixProvider.from_files(*files)
        cfg = TravelConfig()
        near_a = pt(0, 40)  # 40 m from node A, well inside the 1 km snap radius
        assert travel_time(near_a, pt(0, 3000), cfg, provider) == 240.0

    def test_same_node_is_zero(self, files):
        provider = OfflineMatrixProvider.from_files(*files)
        cfg = TravelConfig()
        assert travel_time(YARD, pt(0, 10), cfg, provider) == 0.0

    def test_point_beyond_snap_radius_misses(self, files):
        provider = OfflineMatrixProvider.from_files(*files)
        cfg = TravelConfig()
        far = pt(0, 1500)  # >1 km from both nodes
        with pytest.raises(MatrixMiss):
            travel_time(far, YARD, cfg, provider)

    def test_build_matrix_fills_misses_with_haversine(self, files):
        provider = OfflineMatrixProvider.from_files(*files)
        cfg = TravelConfig()
        far = pt(0, 1500)
        m = build_matrix([far], [YARD], cfg, provider)
        expected = haversine_m(far, YARD) / cfg.fallback_speed_mps
        assert m.seconds[0][0] == pytest.approx(expected, rel=1e-9)
        assert (0, 0) in m.fallback_cells

    def test_build_matrix_strict_mode_raises(self, files):
        provider = OfflineMatrixProvider.from_files(*files)
        cfg = TravelConfig(haversine_fallback=False)
        with pytest.raises(MatrixMiss):
            build_matrix([pt(0, 1500)], [YARD], cfg, provider)

    def test_negative_seconds_rejected(self, tmp_path):
        nodes = tmp_path / "n.csv"
        matrix = tmp_path / "m.csv"
        nodes.write_text(f"node_id,lat,lon\nA,{YARD.lat},{YARD.lon}\n")
        matrix.write_text("from_id,to_id,seconds\nA,A,-5\n")
        with pytest.raises(ConfigError):
            OfflineMatrixProvider.from_files(nodes, matrix)


class TestExternalRouter:
    def test_matrix_matches_stub_arithmetic(self):
        with StubRouterServer() as stub:
            cfg = TravelConfig(router_endpoint=stub.endpoint)
            provider = ExternalRouterProvider(cfg)
            origin, dest = YARD, pt(0, 2000)
            cells = provider.matrix([origin], [dest])
            expected = haversine_m(origin, dest) / stub.speed_mps * stub.road_factor
            assert cells[0][0] == pytest.approx(expected, rel=1e-6)

    def test_http_failure_surfaces_as_router_unavailable(self):
        with StubRouterServer() as stub:
            stub.fail_next = 1
            cfg = TravelConfig(router_endpoint=stub.endpoint)
            with pytest.raises(RouterUnavailable):
                travel_time(YARD, pt(0, 2000), cfg, ExternalRouterProvider(cfg))

    def test_null_cell_raises_without_fallback(self):
        with StubRouterServer() as stub:
            stub.null_cells = {(0, 0)}
            cfg = TravelConfig(router_endpoint=stub.endpoint)
            with pytest.raises(RouterUnavailable):
                travel_time(YARD, pt(0, 2000), cfg, ExternalRouterProvider(cfg))

    def test_null_cell_falls_back_in_build_matrix(self):
        with StubRouterServer() as stub:
            stub.null_cells = {(0, 1)}
            cfg = TravelConfig(router_endpoint=stub.endpoint)
            dests = [pt(0, 2000), pt(0, 4000)]
            m = build_matrix([YARD], dests, cfg, ExternalRouterProvider(cfg))
            assert m.fallback_cells == frozenset({(0, 1)})
            expected = haversine_m(YARD, dests[1]) / cfg.fallback_speed_mps
            assert m.seconds[0][1] == pytest.approx(expected, rel=1e-9)
            assert (0, 0) not in m.fallback_cells

    def test_whole_call_failure_falls_back_in_build_matrix(self):
        with StubRouterServer() as stub:
            stub.fail_next = 10
            cfg = TravelConfig(router_endpoint=stub.endpoint)
            m = build_matrix([YARD], [pt(0, 2000)], cfg, ExternalRouterProvider(cfg))
            assert m.fallback_cells == frozenset({(0, 0)})

    def test_strict_mode_propagates_failure(self):
        with StubRouterServer() as stub:
            stub.fail_next = 10
            cfg = TravelConfig(router_endpoint=stub.endpoint, haversine_fallback=False)
            with pytest.raises(RouterUnavailable):
                build_matrix([YARD], [pt(0, 2000)], cfg, ExternalRouterProvider(cfg))

    def test_bearer_token_from_environment(self, monkeypatch):
        with StubRouterServer() as stub:
            stub.require_token = "sesame"
            cfg = TravelConfig(router_endpoint=stub.endpoint)

            monkeypatch.delenv(ROUTER_API_KEY_ENV, raising=False)
            with pytest.raises(RouterUnavailable):
                travel_time(YARD, pt(0, 2000), cfg, ExternalRouterProvider(cfg))

            monkeypatch.setenv(ROUTER_API_KEY_ENV, "sesame")
            tau = travel_time(YARD, pt(0, 2000), cfg, ExternalRouterProvider(cfg))
            assert tau > 0
