"""JSON codecs for the normalized domain types.

One shape per type, used everywhere a domain value crosses a boundary:
replay payloads, cache rows, structured context rendering, dataset
files, and HTTP responses. Optional fields are omitted when ``None`` so
the canonical form is unique.
"""

from __future__ import annotations

from datetime import datetime, timezone
from typing import Any

from .model import LatLng, Place, Provider, RouteResult, RouteStep, Tool


def latlng_to_json(p: LatLng) -> dict:
    return {"latitude": p.latitude, "longitude": p.longitude}


def latlng_from_json(obj: Any) -> LatLng:
    return LatLng(float(obj["latitude"]), float(obj["longitude"]))


def place_to_json(p: Place) -> dict:
    doc: dict[str, Any] = {
        "id": p.id,
        "display_name": p.display_name,
        "short_address": p.short_address,
        "location": latlng_to_json(p.location),
        "provider": p.provider.value,
    }
    if p.rating is not None:
        doc["rating"] = p.rating
    if p.price_level is not None:
        doc["price_level"] = p.price_level
    if p.opening_hours is not None:
        doc["opening_hours"] = list(p.opening_hours)
    if p.reviews is not None:
        doc["reviews"] = list(p.reviews)
    if p.accessibility is not None:
        doc["accessibility"] = list(p.accessibility)
    return doc


def place_from_json(obj: dict) -> Place:
    return Place(
        id=str(obj["id"]),
        display_name=obj["display_name"],
        short_address=obj["short_address"],
        location=latlng_from_json(obj["location"]),
        provider=Provider(obj["provider"]),
        rating=obj.get("rating"),
        price_level=obj.get("price_level"),
        opening_hours=_opt_tuple(obj.get("opening_hours")),
        reviews=_opt_tuple(obj.get("reviews")),
        accessibility=_opt_tuple(obj.get("accessibility")),
    )


def _opt_tuple(value: list | None) -> tuple | None:
    return None if value is None else tuple(value)


def _endpoint_to_json(value: LatLng | str) -> Any:
    return value if isinstance(value, str) else latlng_to_json(value)


def _endpoint_from_json(value: Any) -> LatLng | str:
    return value if isinstance(value, str) else latlng_from_json(value)


def route_to_json(r: RouteResult) -> dict:
    return {
        "origin": _endpoint_to_json(r.origin),
        "destination": _endpoint_to_json(r.destination),
        "intermediates": list(r.intermediates),
        "travel_mode": r.travel_mode,
        "distance_meters": r.distance_meters,
        "duration_seconds": r.duration_seconds,
        "steps": [
            {"instruction": s.instruction, "distance_meters": s.distance_meters}
            for s in r.steps
        ],
        "encoded_polyline": r.encoded_polyline,
        "provider": r.provider.value,
    }


def route_from_json(obj: dict) -> RouteResult:
    return RouteResult(
        origin=_endpoint_from_json(obj["origin"]),
        destination=_endpoint_from_json(obj["destination"]),
        intermediates=tuple(obj.get("intermediates", [])),
        travel_mode=obj["travel_mode"],
        distance_meters=int(obj["distance_meters"]),
        duration_seconds=int(obj["duration_seconds"]),
        steps=tuple(
            RouteStep(s["instruction"], int(s["distance_meters"]))
            for s in obj.get("steps", [])
        ),
        encoded_polyline=obj["encoded_polyline"],
        provider=Provider(obj["provider"]),
    )


def tool_value(tool: Tool | str) -> str:
    return tool.value if isinstance(tool, Tool) else Tool(tool).value


# Timestamps are modeled at whole-second resolution: every persisted
# artifact formats them identically, so round trips are exact.

def format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_timestamp(text: str) -> datetime:
    return datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)


def truncate_to_second(dt: datetime) -> datetime:
    return dt.astimezone(timezone.utc).replace(microsecond=0)
