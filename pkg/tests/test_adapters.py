from __future__ import annotations

import json

import pytest

from geoqa.adapters import (
    AdapterRegistry,
    UnifiedQuery,
    default_registry,
    normalize_route_request,
    query_digest,
    validate_normalized,
)
from geoqa.adapters.base import AdapterDescriptor, ToolAdapter
from geoqa.adapters.google import GoogleComputeRoutes, GoogleTextSearch
from geoqa.adapters.tomtom import TomTomComputeRoutes, TomTomTextSearch
from geoqa.adapters.osm import OsmComputeRoutes, OsmTextSearch
from geoqa.errors import (
    MalformedProviderResponse,
    UnsupportedPair,
    UnsupportedParameter,
)
from geoqa.jsonutil import canonical_bytes
from geoqa.model import TRAFFIC_UNAWARE, Provider, Tool
from geoqa.polyline import decode_polyline

LOUVRE_TT_RAW = {
    "results": [
        {
            "id": "X",
            "poi": {"name": "Louvre"},
            "address": {"freeformAddress": "Rue de Rivoli, Paris"},
            "position": {"lat": 48.8606, "lon": 2.3376},
            "score": 2.5,
        }
    ]
}

ROUTE_QUERY = {
    "origin": {"latitude": 48.8584, "longitude": 2.2945},
    "destination": {"latitude": 48.8606, "longitude": 2.3376},
    "travel_mode": "DRIVE",
}


class TestTomTomTextSearch:
    def test_template_matches_published_shape(self):
        adapter = TomTomTextSearch()
        template = adapter.convert_request(
            UnifiedQuery(Tool.TEXT_SEARCH, {"query": "Louvre Museum"})
        )
        assert template.url == "https://api.tomtom.com/search/2/poiSearch/Louvre%20Museum.json"
        assert template.method == "GET"
        assert template.query_params == {
            "key": "key:TOMTOM_API_KEY",
            "limit": "5",
            "language": "en-US",
        }

    def test_response_mapping(self):
        adapter = TomTomTextSearch()
        resp = adapter.convert_response(canonical_bytes(LOUVRE_TT_RAW))
        place = resp.places[0]
        assert place.id == "X"
        assert place.display_name == "Louvre"
        assert place.short_address == "Rue de Rivoli, Paris"
        assert (place.location.latitude, place.location.longitude) == (48.8606, 2.3376)
        assert place.provider is Provider.TOMTOM

    def test_missing_poi_name_names_the_path(self):
        raw = json.loads(json.dumps(LOUVRE_TT_RAW))
        del raw["results"][0]["poi"]["name"]
        adapter = TomTomTextSearch()
        with pytest.raises(MalformedProviderResponse) as exc:
            adapter.convert_response(canonical_bytes(raw))
        assert exc.value.path == "results[0].poi.name"

    def test_empty_result_list(self):
        adapter = TomTomTextSearch()
        resp = adapter.convert_response(b'{"results": []}')
        assert resp.places == ()

    def test_unsupported_parameter_is_named(self):
        adapter = TomTomTextSearch()
        with pytest.raises(UnsupportedParameter) as exc:
            adapter.convert_request(
                UnifiedQuery(Tool.TEXT_SEARCH, {"query": "x", "min_rating": 4})
            )
        assert exc.value.name == "min_rating"

    def test_deterministic_templates(self):
        adapter = TomTomTextSearch()
        q = UnifiedQuery(Tool.TEXT_SEARCH, {"query": "Louvre Museum", "limit": 5})
        assert adapter.convert_request(q) == adapter.convert_request(q)


class TestGoogle:
    def test_text_search_parses_rich_place(self):
        raw = {
            "places": [
                {
                    "id": "gp1",
                    "displayName": {"text": "Louvre Museum"},
                    "shortFormattedAddress": "Rue de Rivoli, Paris",
                    "location": {"latitude": 48.8606, "longitude": 2.3376},
                    "rating": 4.7,
                    "priceLevel": "PRICE_LEVEL_MODERATE",
                    "regularOpeningHours": {"weekdayDescriptions": ["Mon: 9-18"]},
                    "reviews": [{"text": {"text": "Wonderful"}}],
                    "accessibilityOptions": {"wheelchairAccessibleEntrance": True},
                    "types": ["museum"],
                }
            ]
        }
        resp = GoogleTextSearch().convert_response(canonical_bytes(raw))
        place = resp.places[0]
        assert place.rating == 4.7
        assert place.price_level == 2
        assert place.opening_hours == ("Mon: 9-18",)
        assert place.reviews == ("Wonderful",)
        assert place.accessibility == ("wheelchairAccessibleEntrance",)

    def test_missing_display_name_path(self):
        raw = {"places": [{"id": "gp1", "displayName": {}, "shortFormattedAddress": "x"}]}
        with pytest.raises(MalformedProviderResponse) as exc:
            GoogleTextSearch().convert_response(canonical_bytes(raw))
        assert exc.value.path == "places[0].displayName.text"

    def test_routes_template_pins_traffic_unaware(self):
        q = normalize_route_request(UnifiedQuery(Tool.COMPUTE_ROUTES, dict(ROUTE_QUERY)))
        template = GoogleComputeRoutes().convert_request(q)
        assert template.body["routingPreference"] == TRAFFIC_UNAWARE
        assert "TRANSIT" not in canonical_bytes(template.to_json()).decode()

    def test_routes_response(self):
        raw = {
            "routes": [
                {
                    "distanceMeters": 4200,
                    "duration": "640s",
                    "polyline": {"encodedPolyline": "_p~iF~ps|U_ulLnnqC"},
                    "legs": [
                        {
                            "steps": [
                                {
                                    "distanceMeters": 1200,
                                    "navigationInstruction": {"instructions": "Head east"},
                                }
                            ]
                        }
                    ],
                }
            ]
        }
        q = UnifiedQuery(Tool.COMPUTE_ROUTES, dict(ROUTE_QUERY))
        resp = GoogleComputeRoutes().convert_response(canonical_bytes(raw), q)
        route = resp.routes[0]
        assert route.distance_meters == 4200
        assert route.duration_seconds == 640
        assert route.steps[0].instruction == "Head east"
        assert decode_polyline(route.encoded_polyline)
        assert route.travel_mode == "DRIVE"


class TestTomTomRoutes:
    def test_template_carries_audit_marker(self):
        q = normalize_route_request(UnifiedQuery(Tool.COMPUTE_ROUTES, dict(ROUTE_QUERY)))
        template = TomTomComputeRoutes().convert_request(q)
        assert template.query_params["trafficAwareness"] == TRAFFIC_UNAWARE
        assert template.query_params["traffic"] == "false"
        assert "48.8584,2.2945:48.8606,2.3376" in template.url

    def test_response_encodes_leg_points(self):
        raw = {
            "routes": [
                {
                    "summary": {"lengthInMeters": 4100, "travelTimeInSeconds": 600},
                    "legs": [
                        {
                            "points": [
                                {"latitude": 48.8584, "longitude": 2.2945},
                                {"latitude": 48.8600, "longitude": 2.3100},
                                {"latitude": 48.8606, "longitude": 2.3376},
                            ]
                        }
                    ],
                    "guidance": {
                        "instructions": [{"message": "Head east", "lengthInMeters": 2000}]
                    },
                }
            ]
        }
        q = UnifiedQuery(Tool.COMPUTE_ROUTES, dict(ROUTE_QUERY))
        resp = TomTomComputeRoutes().convert_response(canonical_bytes(raw), q)
        route = resp.routes[0]
        points = decode_polyline(route.encoded_polyline)
        assert len(points) == 3
        assert points[0].latitude == pytest.approx(48.8584, abs=1e-5)
        assert route.duration_seconds == 600


class TestOsm:
    def test_nominatim_search(self):
        raw = [
            {
                "place_id": 991,
                "display_name": "Louvre Museum, Rue de Rivoli, Paris, France",
                "name": "Louvre Museum",
                "lat": "48.8606",
                "lon": "2.3376",
            }
        ]
        resp = OsmTextSearch().convert_response(canonical_bytes(raw))
        place = resp.places[0]
        assert place.id == "991"
        assert place.display_name == "Louvre Museum"
        assert place.provider is Provider.OPENSTREETMAP

    def test_graphhopper_route(self):
        raw = {
            "paths": [
                {
                    "distance": 4100.4,
                    "time": 600_000,
                    "points": "_p~iF~ps|U_ulLnnqC",
                    "instructions": [{"text": "Head east", "distance": 2000.2}],
                }
            ]
        }
        q = UnifiedQuery(Tool.COMPUTE_ROUTES, dict(ROUTE_QUERY))
        resp = OsmComputeRoutes().convert_response(canonical_bytes(raw), q)
        assert resp.routes[0].distance_meters == 4100
        assert resp.routes[0].duration_seconds == 600
        assert resp.routes[0].steps[0].distance_meters == 2000

    def test_graphhopper_template_has_audit_marker(self):
        q = normalize_route_request(UnifiedQuery(Tool.COMPUTE_ROUTES, dict(ROUTE_QUERY)))
        template = OsmComputeRoutes().convert_request(q)
        assert template.query_params["trafficAwareness"] == TRAFFIC_UNAWARE


class TestRouteNormalization:
    def test_injects_traffic_unaware(self):
        q = normalize_route_request(UnifiedQuery(Tool.COMPUTE_ROUTES, dict(ROUTE_QUERY)))
        assert q.get("traffic_awareness") == TRAFFIC_UNAWARE

    def test_idempotent(self):
        q = normalize_route_request(UnifiedQuery(Tool.COMPUTE_ROUTES, dict(ROUTE_QUERY)))
        assert normalize_route_request(q) == q

    def test_transit_rejected(self):
        params = dict(ROUTE_QUERY, travel_mode="TRANSIT")
        with pytest.raises(UnsupportedParameter):
            normalize_route_request(UnifiedQuery(Tool.COMPUTE_ROUTES, params))

    @pytest.mark.parametrize(
        "adapter", [GoogleComputeRoutes(), TomTomComputeRoutes(), OsmComputeRoutes()]
    )
    def test_every_route_adapter_rejects_transit(self, adapter):
        params = dict(ROUTE_QUERY, travel_mode="TRANSIT")
        with pytest.raises(UnsupportedParameter):
            adapter.convert_request(UnifiedQuery(Tool.COMPUTE_ROUTES, params))


class TestRegistry:
    def test_shipped_pairs(self, registry):
        assert registry.lookup(Provider.TOMTOM, Tool.NEARBY_SEARCH)
        assert registry.lookup(Provider.REPLAY, Tool.COMPUTE_ROUTES)
        assert registry.lookup(Provider.GOOGLE, Tool.SEARCH_ALONG_ROUTE)

    def test_osm_nearby_not_supported(self, registry):
        with pytest.raises(UnsupportedPair):
            registry.lookup(Provider.OPENSTREETMAP, Tool.NEARBY_SEARCH)

    def test_stub_providers_fail_lookup(self, registry):
        for provider in (Provider.MAPBOX, Provider.HERE, Provider.AZURE):
            with pytest.raises(UnsupportedPair):
                registry.lookup(provider, Tool.TEXT_SEARCH)

    def test_registering_outside_support_matrix_fails(self):
        class Rogue(ToolAdapter):
            descriptor = AdapterDescriptor(
                provider=Provider.OPENSTREETMAP,
                tool=Tool.NEARBY_SEARCH,
                family="rogue",
                allowed_params=frozenset(),
            )

            def convert_request(self, query):
                raise NotImplementedError

            def convert_response(self, raw, query=None):
                raise NotImplementedError

        registry = AdapterRegistry()
        with pytest.raises(UnsupportedPair):
            registry.register(Rogue())

    def test_duplicate_registration_fails(self):
        registry = AdapterRegistry()
        registry.register(TomTomTextSearch())
        with pytest.raises(UnsupportedPair):
            registry.register(TomTomTextSearch())


class TestReplayProvider:
    def test_template_embeds_query_digest(self, registry):
        adapter = registry.lookup(Provider.REPLAY, Tool.TEXT_SEARCH)
        q = UnifiedQuery(Tool.TEXT_SEARCH, {"query": "Louvre Museum"})
        template = adapter.convert_request(q)
        assert template.url == f"replay://{query_digest(q)}"

    def test_digest_ignores_parameter_order(self):
        a = UnifiedQuery(Tool.TEXT_SEARCH, {"query": "x", "limit": 5})
        b = UnifiedQuery(Tool.TEXT_SEARCH, {"limit": 5, "query": "x"})
        assert query_digest(a) == query_digest(b)

    def test_round_trips_normalized_payload(self, registry):
        from geoqa.cache import normalized_to_json
        from geoqa.jsonutil import canonical_bytes as cb

        adapter = registry.lookup(Provider.REPLAY, Tool.TEXT_SEARCH)
        resp = TomTomTextSearch().convert_response(canonical_bytes(LOUVRE_TT_RAW))
        again = adapter.convert_response(cb(normalized_to_json(resp)))
        assert again.places == resp.places


class TestCrossProviderUniformity:
    def test_same_logical_query_same_field_set(self):
        google_raw = {
            "places": [
                {
                    "id": "gp1",
                    "displayName": {"text": "Louvre Museum"},
                    "shortFormattedAddress": "Rue de Rivoli, 75001 Paris",
                    "location": {"latitude": 48.8606, "longitude": 2.3376},
                }
            ]
        }
        g = GoogleTextSearch().convert_response(canonical_bytes(google_raw))
        t = TomTomTextSearch().convert_response(canonical_bytes(LOUVRE_TT_RAW))
        assert populated_fields(g.places[0]) == populated_fields(t.places[0])
        for resp in (g, t):
            assert validate_normalized(resp) == []


def populated_fields(place) -> set[str]:
    import dataclasses

    return {
        f.name for f in dataclasses.fields(place) if getattr(place, f.name) is not None
    }
