"""Google Maps adapters: all five tools.

Requests target the Places/Routes web services with the API key carried
as a ``key:GOOGLE_MAPS_API_KEY`` placeholder query parameter. Route
requests always pin ``routingPreference`` to TRAFFIC_UNAWARE.
"""

from __future__ import annotations

from typing import Any

from ..errors import MalformedProviderResponse, UnsupportedParameter
from ..model import TRAFFIC_UNAWARE, LatLng, Place, Provider, RouteResult, RouteStep, Tool
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

_KEY = "key:GOOGLE_MAPS_API_KEY"
_PLACES = "https://places.googleapis.com/v1"
_ROUTES = "https://routes.googleapis.com/directions/v2:computeRoutes"

_PRICE_LEVELS = {
    "PRICE_LEVEL_FREE": 0,
    "PRICE_LEVEL_INEXPENSIVE": 1,
    "PRICE_LEVEL_MODERATE": 2,
    "PRICE_LEVEL_EXPENSIVE": 3,
    "PRICE_LEVEL_VERY_EXPENSIVE": 4,
}


def _parse_place(node: Any, root: str) -> Place:
    pid = dig(node, "id", root=root)
    name = dig(node, "displayName.text", root=root)
    address = dig(node, "shortFormattedAddress", root=root)
    lat = dig(node, "location.latitude", root=root)
    lng = dig(node, "location.longitude", root=root)
    price = node.get("priceLevel")
    if price is not None and price not in _PRICE_LEVELS:
        raise MalformedProviderResponse(f"{root}.priceLevel" if root else "priceLevel", f"unknown tier {price!r}")
    hours = node.get("regularOpeningHours", {}).get("weekdayDescriptions")
    reviews = None
    if "reviews" in node:
        reviews = tuple(
            dig(node, f"reviews[{i}].text.text", root=root) for i in range(len(node["reviews"]))
        )
    accessibility = None
    if "accessibilityOptions" in node:
        accessibility = tuple(
            sorted(flag for flag, on in node["accessibilityOptions"].items() if on)
        )
    try:
        loc = LatLng(float(lat), float(lng))
    except (TypeError, ValueError) as exc:
        raise MalformedProviderResponse(f"{root}.location" if root else "location", str(exc)) from exc
    return Place(
        id=str(pid),
        display_name=name,
        short_address=address,
        location=loc,
        provider=Provider.GOOGLE,
        rating=node.get("rating"),
        price_level=None if price is None else _PRICE_LEVELS[price],
        opening_hours=None if hours is None else tuple(hours),
        reviews=reviews,
        accessibility=accessibility,
    )


def _parse_places_list(doc: Any) -> tuple[Place, ...]:
    places = doc.get("places", [])
    return tuple(_parse_place(places[i], f"places[{i}]") for i in range(len(places)))


def _waypoint(value: Any, param: str) -> dict:
    if isinstance(value, dict) and "place_id" in value:
        return {"placeId": value["place_id"]}
    if isinstance(value, dict) and "latitude" in value and "longitude" in value:
        return {
            "location": {
                "latLng": {"latitude": value["latitude"], "longitude": value["longitude"]}
            }
        }
    raise UnsupportedParameter(param, "expected {place_id} or {latitude, longitude}")


class GoogleTextSearch(ToolAdapter):
    descriptor = AdapterDescriptor(
        provider=Provider.GOOGLE,
        tool=Tool.TEXT_SEARCH,
        family="google",
        allowed_params=frozenset({"query", "limit", "language", "min_rating"}),
        category_vocabulary=load_category_vocabulary("google"),
    )

    def convert_request(self, query: UnifiedQuery) -> RequestTemplate:
        self.check_query(query)
        body: dict[str, Any] = {
            "textQuery": query.get("query", ""),
            "languageCode": query.get("language", "en"),
            "maxResultCount": query.get("limit", 5),
        }
        if query.get("min_rating") is not None:
            body["minRating"] = query.get("min_rating")
        return RequestTemplate(
            url=f"{_PLACES}/places:searchText",
            method="POST",
            query_params={"key": _KEY},
            body=body,
        )

    def convert_response(self, raw: bytes, query: UnifiedQuery | None = None) -> NormalizedResponse:
        doc = self.parse_json(raw)
        return NormalizedResponse(kind=Tool.TEXT_SEARCH, places=_parse_places_list(doc))


class GooglePlaceDetails(ToolAdapter):
    descriptor = AdapterDescriptor(
        provider=Provider.GOOGLE,
        tool=Tool.PLACE_DETAILS,
        family="google",
        allowed_params=frozenset({"place_id", "language"}),
    )

    _FIELDS = (
        "id,displayName,shortFormattedAddress,location,rating,priceLevel,"
        "regularOpeningHours,reviews,accessibilityOptions"
    )

    def convert_request(self, query: UnifiedQuery) -> RequestTemplate:
        self.check_query(query)
        place_id = query.get("place_id")
        if not place_id:
            raise UnsupportedParameter("place_id", "required for place details")
        return RequestTemplate(
            url=f"{_PLACES}/places/{place_id}",
            method="GET",
            query_params={
                "key": _KEY,
                "fields": self._FIELDS,
                "languageCode": query.get("language", "en"),
            },
        )

    def convert_response(self, raw: bytes, query: UnifiedQuery | None = None) -> NormalizedResponse:
        doc = self.parse_json(raw)
        return NormalizedResponse(kind=Tool.PLACE_DETAILS, places=(_parse_place(doc, ""),))


class GoogleNearbySearch(ToolAdapter):
    descriptor = AdapterDescriptor(
        provider=Provider.GOOGLE,
        tool=Tool.NEARBY_SEARCH,
        family="google",
        allowed_params=frozenset(
            {
                "anchor_place_id",
                "anchor_location",
                "category",
                "radius_m",
                "min_rating",
                "price_levels",
                "ranking",
                "limit",
            }
        ),
        category_vocabulary=load_category_vocabulary("google"),
    )

    def convert_request(self, query: UnifiedQuery) -> RequestTemplate:
        self.check_query(query)
        anchor = query.get("anchor_location")
        if not isinstance(anchor, dict) or "latitude" not in anchor:
            raise UnsupportedParameter("anchor_location", "required {latitude, longitude}")
        ranking = "DISTANCE" if query.get("ranking", "distance") == "distance" else "POPULARITY"
        body: dict[str, Any] = {
            "includedTypes": [query.get("category", "restaurant")],
            "maxResultCount": query.get("limit", 20),
            "rankPreference": ranking,
            "locationRestriction": {
                "circle": {
                    "center": {
                        "latitude": anchor["latitude"],
                        "longitude": anchor["longitude"],
                    },
                    "radius": query.get("radius_m", 1500),
                }
            },
        }
        return RequestTemplate(
            url=f"{_PLACES}/places:searchNearby",
            method="POST",
            query_params={"key": _KEY},
            body=body,
        )

    def convert_response(self, raw: bytes, query: UnifiedQuery | None = None) -> NormalizedResponse:
        doc = self.parse_json(raw)
        return NormalizedResponse(kind=Tool.NEARBY_SEARCH, places=_parse_places_list(doc))


class GoogleComputeRoutes(ToolAdapter):
    descriptor = AdapterDescriptor(
        provider=Provider.GOOGLE,
        tool=Tool.COMPUTE_ROUTES,
        family="google",
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
        body: dict[str, Any] = {
            "origin": _waypoint(query.get("origin"), "origin"),
            "destination": _waypoint(query.get("destination"), "destination"),
            "travelMode": query.get("travel_mode", "DRIVE"),
            "routingPreference": TRAFFIC_UNAWARE,
            "computeAlternativeRoutes": bool(query.get("alternatives", False)),
        }
        intermediates = query.get("intermediates")
        if intermediates:
            body["intermediates"] = [_waypoint(w, "intermediates") for w in intermediates]
        return RequestTemplate(
            url=_ROUTES,
            method="POST",
            query_params={"key": _KEY},
            body=body,
        )

    def convert_response(self, raw: bytes, query: UnifiedQuery | None = None) -> NormalizedResponse:
        doc = self.parse_json(raw)
        origin = endpoint_from_param(query.get("origin")) if query else ""
        destination = endpoint_from_param(query.get("destination")) if query else ""
        mode = query.get("travel_mode", "DRIVE") if query else "DRIVE"
        intermediates = _intermediate_ids(query)
        routes = []
        for i in range(len(doc.get("routes", []))):
            node = dig(doc, f"routes[{i}]")
            duration = dig(doc, f"routes[{i}].duration")
            if not isinstance(duration, str) or not duration.endswith("s"):
                raise MalformedProviderResponse(
                    f"routes[{i}].duration", f"expected '<n>s', got {duration!r}"
                )
            steps = []
            for j, leg in enumerate(node.get("legs", [])):
                for k in range(len(leg.get("steps", []))):
                    step_root = f"routes[{i}].legs[{j}].steps[{k}]"
                    step = leg["steps"][k]
                    steps.append(
                        RouteStep(
                            instruction=dig(step, "navigationInstruction.instructions", root=step_root),
                            distance_meters=int(dig(step, "distanceMeters", root=step_root)),
                        )
                    )
            routes.append(
                RouteResult(
                    origin=origin,
                    destination=destination,
                    intermediates=intermediates,
                    travel_mode=mode,
                    distance_meters=int(dig(doc, f"routes[{i}].distanceMeters")),
                    duration_seconds=int(duration[:-1]),
                    encoded_polyline=dig(doc, f"routes[{i}].polyline.encodedPolyline"),
                    provider=Provider.GOOGLE,
                    steps=tuple(steps),
                )
            )
        return NormalizedResponse(kind=Tool.COMPUTE_ROUTES, routes=tuple(routes))


def _intermediate_ids(query: UnifiedQuery | None) -> tuple[str, ...]:
    if query is None:
        return ()
    ids = []
    for w in query.get("intermediates") or []:
        if isinstance(w, dict) and "place_id" in w:
            ids.append(str(w["place_id"]))
    return tuple(ids)


class GoogleSearchAlongRoute(ToolAdapter):
    descriptor = AdapterDescriptor(
        provider=Provider.GOOGLE,
        tool=Tool.SEARCH_ALONG_ROUTE,
        family="google",
        allowed_params=frozenset({"query", "route_polyline", "limit", "traffic_awareness"}),
        polyline_precision=5,
    )

    def convert_request(self, query: UnifiedQuery) -> RequestTemplate:
        self.check_query(query)
        polyline_text = query.get("route_polyline")
        if not polyline_text:
            raise UnsupportedParameter("route_polyline", "required for along-route search")
        body = {
            "textQuery": query.get("query", ""),
            "maxResultCount": query.get("limit", 20),
            "searchAlongRouteParameters": {"polyline": {"encodedPolyline": polyline_text}},
            "routingPreference": TRAFFIC_UNAWARE,
        }
        return RequestTemplate(
            url=f"{_PLACES}/places:searchText",
            method="POST",
            query_params={"key": _KEY},
            body=body,
        )

    def convert_response(self, raw: bytes, query: UnifiedQuery | None = None) -> NormalizedResponse:
        doc = self.parse_json(raw)
        return NormalizedResponse(kind=Tool.SEARCH_ALONG_ROUTE, places=_parse_places_list(doc))


ADAPTERS = (
    GoogleTextSearch(),
    GooglePlaceDetails(),
    GoogleNearbySearch(),
    GoogleComputeRoutes(),
    GoogleSearchAlongRoute(),
)
