"""TomTom adapters: all five tools.

Text search follows the published poiSearch pattern with the free-text
query percent-encoded into the URL path (raw concatenation breaks on
spaces) and the key carried as a ``key:TOMTOM_API_KEY`` placeholder.
TomTom's routing responses carry coordinate lists rather than encoded
polylines, so the route adapter encodes geometry at precision 5.

Route templates carry both the provider-native ``traffic=false`` and the
artifact-level ``trafficAwareness=TRAFFIC_UNAWARE`` marker; the marker
makes every recorded route request auditable with one corpus scan.
"""

from __future__ import annotations

from typing import Any
from urllib.parse import quote

from ..errors import UnsupportedParameter
from ..model import TRAFFIC_UNAWARE, LatLng, Place, Provider, RouteResult, RouteStep, Tool
from ..polyline import decode_polyline, encode_polyline
from .base import (
    AdapterDescriptor,
    NormalizedResponse,
    RequestTemplate,
    ToolAdapter,
    UnifiedQuery,
    dig,
    endpoint_from_param,
    load_category_vocabulary,
)

_KEY = "key:TOMTOM_API_KEY"
_BASE = "https://api.tomtom.com"

_TRAVEL_MODES = {
    "DRIVE": "car",
    "WALK": "pedestrian",
    "BICYCLE": "bicycle",
    "TWO_WHEELER": "motorcycle",
}

_VOCABULARY = load_category_vocabulary("tomtom")
_CATEGORY_CODES = {label: code for code, label in _VOCABULARY}


def _parse_result(node: Any, root: str) -> Place:
    pid = dig(node, "id", root=root)
    name = dig(node, "poi.name", root=root)
    address = dig(node, "address.freeformAddress", root=root)
    lat = dig(node, "position.lat", root=root)
    lon = dig(node, "position.lon", root=root)
    return Place(
        id=str(pid),
        display_name=name,
        short_address=address,
        location=LatLng(float(lat), float(lon)),
        provider=Provider.TOMTOM,
    )


def _parse_results_list(doc: Any) -> tuple[Place, ...]:
    results = doc.get("results", [])
    return tuple(_parse_result(results[i], f"results[{i}]") for i in range(len(results)))


def _coord_pair(value: Any, param: str) -> str:
    if isinstance(value, dict) and "latitude" in value and "longitude" in value:
        return f"{value['latitude']},{value['longitude']}"
    raise UnsupportedParameter(param, "tomtom routing requires {latitude, longitude}")


class TomTomTextSearch(ToolAdapter):
    descriptor = AdapterDescriptor(
        provider=Provider.TOMTOM,
        tool=Tool.TEXT_SEARCH,
        family="tomtom",
        allowed_params=frozenset({"query", "limit"}),
        category_vocabulary=_VOCABULARY,
    )

    def convert_request(self, query: UnifiedQuery) -> RequestTemplate:
        self.check_query(query)
        text = quote(query.get("query", ""), safe="")
        return RequestTemplate(
            url=f"{_BASE}/search/2/poiSearch/{text}.json",
            method="GET",
            query_params={
                "key": _KEY,
                "limit": str(query.get("limit", 5)),
                "language": "en-US",
            },
        )

    def convert_response(self, raw: bytes, query: UnifiedQuery | None = None) -> NormalizedResponse:
        doc = self.parse_json(raw)
        return NormalizedResponse(kind=Tool.TEXT_SEARCH, places=_parse_results_list(doc))


class TomTomPlaceDetails(ToolAdapter):
    descriptor = AdapterDescriptor(
        provider=Provider.TOMTOM,
        tool=Tool.PLACE_DETAILS,
        family="tomtom",
        allowed_params=frozenset({"place_id"}),
    )

    def convert_request(self, query: UnifiedQuery) -> RequestTemplate:
        self.check_query(query)
        place_id = query.get("place_id")
        if not place_id:
            raise UnsupportedParameter("place_id", "required for place details")
        return RequestTemplate(
            url=f"{_BASE}/search/2/place.json",
            method="GET",
            query_params={"key": _KEY, "entityId": str(place_id), "language": "en-US"},
        )

    def convert_response(self, raw: bytes, query: UnifiedQuery | None = None) -> NormalizedResponse:
        doc = self.parse_json(raw)
        return NormalizedResponse(kind=Tool.PLACE_DETAILS, places=_parse_results_list(doc))


class TomTomNearbySearch(ToolAdapter):
    descriptor = AdapterDescriptor(
        provider=Provider.TOMTOM,
        tool=Tool.NEARBY_SEARCH,
        family="tomtom",
        allowed_params=frozenset(
            {"anchor_place_id", "anchor_location", "category", "radius_m", "ranking", "limit"}
        ),
        category_vocabulary=_VOCABULARY,
    )

    def convert_request(self, query: UnifiedQuery) -> RequestTemplate:
        self.check_query(query)
        anchor = query.get("anchor_location")
        if not isinstance(anchor, dict) or "latitude" not in anchor:
            raise UnsupportedParameter("anchor_location", "required {latitude, longitude}")
        params = {
            "key": _KEY,
            "lat": str(anchor["latitude"]),
            "lon": str(anchor["longitude"]),
            "radius": str(query.get("radius_m", 1500)),
            "limit": str(query.get("limit", 20)),
        }
        category = query.get("category")
        if category is not None:
            code = _CATEGORY_CODES.get(category)
            if code is None:
                raise UnsupportedParameter("category", f"unknown tomtom category {category!r}")
            params["categorySet"] = code
        return RequestTemplate(
            url=f"{_BASE}/search/2/nearbySearch/.json",
            method="GET",
            query_params=params,
        )

    def convert_response(self, raw: bytes, query: UnifiedQuery | None = None) -> NormalizedResponse:
        doc = self.parse_json(raw)
        return NormalizedResponse(kind=Tool.NEARBY_SEARCH, places=_parse_results_list(doc))


class TomTomComputeRoutes(ToolAdapter):
    descriptor = AdapterDescriptor(
        provider=Provider.TOMTOM,
        tool=Tool.COMPUTE_ROUTES,
        family="tomtom",
        allowed_params=frozenset(
            {
                "origin",
                "destination",
                "intermediates",
                "travel_mode",
                "alternatives",
                "traffic_awareness",
            }
        ),
        polyline_precision=5,
    )

    def convert_request(self, query: UnifiedQuery) -> RequestTemplate:
        self.check_query(query)
        waypoints = [_coord_pair(query.get("origin"), "origin")]
        for w in query.get("intermediates") or []:
            waypoints.append(_coord_pair(w, "intermediates"))
        waypoints.append(_coord_pair(query.get("destination"), "destination"))
        locations = ":".join(waypoints)
        alternatives = int(query.get("alternatives", False))
        return RequestTemplate(
            url=f"{_BASE}/routing/1/calculateRoute/{locations}/json",
            method="GET",
            query_params={
                "key": _KEY,
                "travelMode": _TRAVEL_MODES[query.get("travel_mode", "DRIVE")],
                "traffic": "false",
                "trafficAwareness": TRAFFIC_UNAWARE,
                "maxAlternatives": str(alternatives),
                "instructionsType": "text",
            },
        )

    def convert_response(self, raw: bytes, query: UnifiedQuery | None = None) -> NormalizedResponse:
        doc = self.parse_json(raw)
        origin = endpoint_from_param(query.get("origin")) if query else ""
        destination = endpoint_from_param(query.get("destination")) if query else ""
        mode = query.get("travel_mode", "DRIVE") if query else "DRIVE"
        routes = []
        for i in range(len(doc.get("routes", []))):
            node = dig(doc, f"routes[{i}]")
            meters = dig(node, "summary.lengthInMeters", root=f"routes[{i}]")
            seconds = dig(node, "summary.travelTimeInSeconds", root=f"routes[{i}]")
            points: list[LatLng] = []
            for j, leg in enumerate(node.get("legs", [])):
                for k in range(len(leg.get("points", []))):
                    p = leg["points"][k]
                    root = f"routes[{i}].legs[{j}].points[{k}]"
                    points.append(
                        LatLng(
                            float(dig(p, "latitude", root=root)),
                            float(dig(p, "longitude", root=root)),
                        )
                    )
            steps = tuple(
                RouteStep(
                    instruction=dig(ins, "message", root=f"routes[{i}].guidance.instructions[{k}]"),
                    distance_meters=int(
                        dig(ins, "lengthInMeters", root=f"routes[{i}].guidance.instructions[{k}]")
                    ),
                )
                for k, ins in enumerate(node.get("guidance", {}).get("instructions", []))
            )
            routes.append(
                RouteResult(
                    origin=origin,
                    destination=destination,
                    travel_mode=mode,
                    distance_meters=int(meters),
                    duration_seconds=int(seconds),
                    encoded_polyline=encode_polyline(points, precision=5),
                    provider=Provider.TOMTOM,
                    steps=steps,
                )
            )
        return NormalizedResponse(kind=Tool.COMPUTE_ROUTES, routes=tuple(routes))


class TomTomSearchAlongRoute(ToolAdapter):
    descriptor = AdapterDescriptor(
        provider=Provider.TOMTOM,
        tool=Tool.SEARCH_ALONG_ROUTE,
        family="tomtom",
        allowed_params=frozenset({"query", "route_polyline", "limit", "traffic_awareness"}),
        polyline_precision=5,
    )

    def convert_request(self, query: UnifiedQuery) -> RequestTemplate:
        self.check_query(query)
        polyline_text = query.get("route_polyline")
        if not polyline_text:
            raise UnsupportedParameter("route_polyline", "required for along-route search")
        text = quote(query.get("query", ""), safe="")
        route_points = [
            {"lat": p.latitude, "lon": p.longitude} for p in decode_polyline(polyline_text)
        ]
        return RequestTemplate(
            url=f"{_BASE}/search/2/searchAlongRoute/{text}.json",
            method="POST",
            query_params={
                "key": _KEY,
                "limit": str(query.get("limit", 20)),
                "maxDetourTime": "600",
                "trafficAwareness": TRAFFIC_UNAWARE,
            },
            body={"route": {"points": route_points}},
        )

    def convert_response(self, raw: bytes, query: UnifiedQuery | None = None) -> NormalizedResponse:
        doc = self.parse_json(raw)
        return NormalizedResponse(kind=Tool.SEARCH_ALONG_ROUTE, places=_parse_results_list(doc))


ADAPTERS = (
    TomTomTextSearch(),
    TomTomPlaceDetails(),
    TomTomNearbySearch(),
    TomTomComputeRoutes(),
    TomTomSearchAlongRoute(),
)
