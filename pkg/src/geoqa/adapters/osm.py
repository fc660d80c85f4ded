"""OpenStreetMap adapters: text search and details via Nominatim,
routing via GraphHopper.

Nominatim is keyless; GraphHopper carries a ``key:GRAPHHOPPER_API_KEY``
placeholder. Nearby and along-route search are not in the support
matrix for this provider.
"""

from __future__ import annotations

from ..errors import UnsupportedParameter
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

_NOMINATIM = "https://nominatim.openstreetmap.org"
_GRAPHHOPPER = "https://graphhopper.com/api/1/route"

_PROFILES = {"DRIVE": "car", "WALK": "foot", "BICYCLE": "bike", "TWO_WHEELER": "scooter"}


def _short_name(display_name: str) -> str:
    return display_name.split(",")[0].strip()


class OsmTextSearch(ToolAdapter):
    descriptor = AdapterDescriptor(
        provider=Provider.OPENSTREETMAP,
        tool=Tool.TEXT_SEARCH,
        family="openstreetmap",
        allowed_params=frozenset({"query", "limit"}),
        category_vocabulary=load_category_vocabulary("openstreetmap"),
    )

    def convert_request(self, query: UnifiedQuery) -> RequestTemplate:
        self.check_query(query)
        return RequestTemplate(
            url=f"{_NOMINATIM}/search",
            method="GET",
            query_params={
                "q": query.get("query", ""),
                "format": "jsonv2",
                "limit": str(query.get("limit", 5)),
                "accept-language": "en",
            },
        )

    def convert_response(self, raw: bytes, query: UnifiedQuery | None = None) -> NormalizedResponse:
        doc = self.parse_json(raw)
        places = []
        for i in range(len(doc) if isinstance(doc, list) else 0):
            node = doc[i]
            display = dig(node, "display_name", root=f"[{i}]")
            name = node.get("name") or _short_name(display)
            places.append(
                Place(
                    id=str(dig(node, "place_id", root=f"[{i}]")),
                    display_name=name,
                    short_address=display,
                    location=LatLng(
                        float(dig(node, "lat", root=f"[{i}]")),
                        float(dig(node, "lon", root=f"[{i}]")),
                    ),
                    provider=Provider.OPENSTREETMAP,
                )
            )
        return NormalizedResponse(kind=Tool.TEXT_SEARCH, places=tuple(places))


class OsmPlaceDetails(ToolAdapter):
    descriptor = AdapterDescriptor(
        provider=Provider.OPENSTREETMAP,
        tool=Tool.PLACE_DETAILS,
        family="openstreetmap",
        allowed_params=frozenset({"place_id"}),
    )

    def convert_request(self, query: UnifiedQuery) -> RequestTemplate:
        self.check_query(query)
        place_id = query.get("place_id")
        if not place_id:
            raise UnsupportedParameter("place_id", "required for place details")
        return RequestTemplate(
            url=f"{_NOMINATIM}/details",
            method="GET",
            query_params={"place_id": str(place_id), "format": "json"},
        )

    def convert_response(self, raw: bytes, query: UnifiedQuery | None = None) -> NormalizedResponse:
        doc = self.parse_json(raw)
        coords = dig(doc, "centroid.coordinates")
        extratags = doc.get("extratags") or {}
        hours = extratags.get("opening_hours")
        accessibility = None
        if extratags.get("wheelchair") == "yes":
            accessibility = ("wheelchair",)
        place = Place(
            id=str(dig(doc, "place_id")),
            display_name=dig(doc, "localname"),
            short_address=", ".join(
                v for v in (doc.get("addresstags") or {}).values() if isinstance(v, str)
            )
            or dig(doc, "localname"),
            location=LatLng(float(coords[1]), float(coords[0])),
            provider=Provider.OPENSTREETMAP,
            opening_hours=None if hours is None else (hours,),
            accessibility=accessibility,
        )
        return NormalizedResponse(kind=Tool.PLACE_DETAILS, places=(place,))


class OsmComputeRoutes(ToolAdapter):
    """Routing for OpenStreetMap data via the GraphHopper service."""

    descriptor = AdapterDescriptor(
        provider=Provider.OPENSTREETMAP,
        tool=Tool.COMPUTE_ROUTES,
        family="openstreetmap",
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
        points = []
        for param in ("origin", "destination"):
            value = query.get(param)
            if not isinstance(value, dict) or "latitude" not in value:
                raise UnsupportedParameter(param, "graphhopper requires {latitude, longitude}")
        waypoints = [query.get("origin")] + list(query.get("intermediates") or []) + [
            query.get("destination")
        ]
        for w in waypoints:
            points.append([w["longitude"], w["latitude"]])
        body = {
            "points": points,
            "profile": _PROFILES[query.get("travel_mode", "DRIVE")],
            "instructions": True,
            "points_encoded": True,
        }
        if query.get("alternatives"):
            body["algorithm"] = "alternative_route"
            body["alternative_route.max_paths"] = 2
        return RequestTemplate(
            url=_GRAPHHOPPER,
            method="POST",
            query_params={
                "key": "key:GRAPHHOPPER_API_KEY",
                "trafficAwareness": TRAFFIC_UNAWARE,
            },
            body=body,
        )

    def convert_response(self, raw: bytes, query: UnifiedQuery | None = None) -> NormalizedResponse:
        doc = self.parse_json(raw)
        origin = endpoint_from_param(query.get("origin")) if query else ""
        destination = endpoint_from_param(query.get("destination")) if query else ""
        mode = query.get("travel_mode", "DRIVE") if query else "DRIVE"
        routes = []
        for i in range(len(doc.get("paths", []))):
            node = dig(doc, f"paths[{i}]")
            steps = tuple(
                RouteStep(
                    instruction=dig(ins, "text", root=f"paths[{i}].instructions[{k}]"),
                    distance_meters=round(
                        dig(ins, "distance", root=f"paths[{i}].instructions[{k}]")
                    ),
                )
                for k, ins in enumerate(node.get("instructions", []))
            )
            routes.append(
                RouteResult(
                    origin=origin,
                    destination=destination,
                    travel_mode=mode,
                    distance_meters=round(dig(node, "distance", root=f"paths[{i}]")),
                    duration_seconds=round(dig(node, "time", root=f"paths[{i}]") / 1000),
                    encoded_polyline=dig(node, "points", root=f"paths[{i}]"),
                    provider=Provider.OPENSTREETMAP,
                    steps=steps,
                )
            )
        return NormalizedResponse(kind=Tool.COMPUTE_ROUTES, routes=tuple(routes))


ADAPTERS = (OsmTextSearch(), OsmPlaceDetails(), OsmComputeRoutes())
