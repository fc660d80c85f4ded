from __future__ import annotations

import pytest

from geoqa.errors import ReplayMiss, UnsupportedPair, UnsupportedParameter
from geoqa.model import Provider, Tool

from conftest import load_scenario
from geoqa.workbench import run_scenario


class TestToolPipeline:
    def test_search_appends_entry(self, replay_bench):
        ctx = replay_bench.create_context("t")
        run = replay_bench.run_tool(
            Provider.GOOGLE, Tool.TEXT_SEARCH, {"query": "Louvre Museum", "limit": 5}, ctx.id
        )
        assert run.entry.sequence_no == 1
        assert not run.from_cache
        assert run.entry.normalized.places[0].display_name == "Louvre Museum"
        assert run.entry.cache_key

    def test_warm_cache_skips_gateway(self, replay_bench):
        ctx = replay_bench.create_context("t")
        params = {"query": "Louvre Museum", "limit": 5}
        replay_bench.run_tool(Provider.GOOGLE, Tool.TEXT_SEARCH, params, ctx.id)
        first_loads = replay_bench.cache.stats()
        again = replay_bench.run_tool(Provider.GOOGLE, Tool.TEXT_SEARCH, params, ctx.id)
        assert again.from_cache
        assert again.entry.sequence_no == 2
        assert replay_bench.cache.stats()["hits"] == first_loads["hits"] + 1
        assert replay_bench.gateway.network_calls == 0

    def test_anchor_place_id_resolved_from_context(self, replay_bench):
        ctx = replay_bench.create_context("t")
        run = replay_bench.run_tool(
            Provider.GOOGLE, Tool.TEXT_SEARCH, {"query": "Louvre Museum", "limit": 5}, ctx.id
        )
        louvre = run.entry.normalized.places[0]
        nearby = replay_bench.run_tool(
            Provider.GOOGLE,
            Tool.NEARBY_SEARCH,
            {
                "anchor_place_id": louvre.id,
                "category": "restaurant",
                "limit": 20,
                "ranking": "distance",
            },
            ctx.id,
        )
        q = nearby.entry.unified_query
        assert q.get("anchor_location") == {
            "latitude": louvre.location.latitude,
            "longitude": louvre.location.longitude,
        }
        assert len(nearby.entry.normalized.places) == 20

    def test_unknown_anchor_rejected(self, replay_bench):
        ctx = replay_bench.create_context("t")
        with pytest.raises(UnsupportedParameter):
            replay_bench.run_tool(
                Provider.GOOGLE,
                Tool.NEARBY_SEARCH,
                {"anchor_place_id": "nope", "category": "restaurant"},
                ctx.id,
            )

    def test_replay_miss_surfaces(self, replay_bench):
        ctx = replay_bench.create_context("t")
        with pytest.raises(ReplayMiss):
            replay_bench.run_tool(
                Provider.GOOGLE, Tool.TEXT_SEARCH, {"query": "never recorded"}, ctx.id
            )

    def test_unsupported_pair_surfaces(self, replay_bench):
        ctx = replay_bench.create_context("t")
        with pytest.raises(UnsupportedPair):
            replay_bench.run_tool(
                Provider.OPENSTREETMAP, Tool.NEARBY_SEARCH, {"category": "cafe"}, ctx.id
            )

    def test_transit_rejected_before_any_io(self, replay_bench):
        ctx = replay_bench.create_context("t")
        with pytest.raises(UnsupportedParameter):
            replay_bench.run_tool(
                Provider.GOOGLE,
                Tool.COMPUTE_ROUTES,
                {
                    "origin": {"latitude": 0, "longitude": 0},
                    "destination": {"latitude": 1, "longitude": 1},
                    "travel_mode": "TRANSIT",
                },
                ctx.id,
            )
        assert replay_bench.cache.stats()["misses"] == 0


class TestScenarioRunner:
    def test_paris_scenario_builds_full_context(self, replay_bench):
        ctx = run_scenario(replay_bench, load_scenario("paris.json"))
        assert [e.tool.value for e in ctx.entries] == [
            "text-search",
            "text-search",
            "place-details",
            "nearby-search",
            "compute-routes",
            "search-along-route",
        ]
        routes_entry = ctx.entries[4]
        assert len(routes_entry.normalized.routes) == 2
        assert len(ctx.entries[3].normalized.places) == 20
        assert len(ctx.entries[5].normalized.places) == 20
        assert len(replay_bench.qa_pairs) == 4

    def test_last_route_polyline_picks_latest(self, replay_bench):
        ctx = run_scenario(replay_bench, load_scenario("paris.json"))
        encoded = replay_bench.last_route_polyline(ctx.id)
        assert encoded == ctx.entries[4].normalized.routes[0].encoded_polyline


class TestDatasetLifecycle:
    def test_export_import_round_trip(self, replay_bench, tmp_path):
        run_scenario(replay_bench, load_scenario("paris.json"))
        dataset = replay_bench.export_dataset()

        from conftest import make_replay_bench

        other = make_replay_bench(tmp_path, "other.sqlite")
        contexts, pairs = other.import_dataset(dataset)
        assert (contexts, pairs) == (1, 4)
        assert other.export_dataset() == dataset

    def test_imported_ids_do_not_collide(self, replay_bench):
        run_scenario(replay_bench, load_scenario("paris.json"))
        dataset = replay_bench.export_dataset()
        replay_bench.import_dataset(dataset)
        new_ctx = replay_bench.create_context("after import")
        assert new_ctx.id not in {c.id for c in dataset.contexts}
