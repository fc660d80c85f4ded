"""Ordered, append-only contexts and their two renderings.

A context accumulates tool invocations as immutable entries, each
holding the raw exchange, the normalized payload, and metadata. Two
deterministic renderings exist: the canonical JSON *structured* form
(complete, traceable, large) and the templated plain-text *formatted*
form (compact, id-free, prompt-ready). Formatting templates are
versioned files so exported datasets record exactly which wording
produced them.
"""

from __future__ import annotations

import base64
import hashlib
import json
import string
from dataclasses import dataclass
from datetime import datetime
from functools import cached_property, lru_cache
from importlib import resources

from .adapters.base import NormalizedResponse, UnifiedQuery
from .cache import normalized_to_json
from .errors import EmptyContext
from .exchange import RawExchange
from .jsonutil import canonical_dumps
from .model import LatLng, Place, Provider, Tool, haversine_distance
from .serialize import format_timestamp

FORMATTED_TEMPLATE_VERSION = "v1"


@lru_cache(maxsize=None)
def _template(name: str, version: str = FORMATTED_TEMPLATE_VERSION) -> string.Template:
    text = (
        resources.files("geoqa")
        .joinpath(f"templates/formatted/{version}/{name}.txt")
        .read_text("utf-8")
    )
    return string.Template(text)


@dataclass(frozen=True)
class ContextEntry:
    """One tool invocation: raw, normalized, and metadata layers."""

    sequence_no: int
    tool: Tool
    provider: Provider
    unified_query: UnifiedQuery
    exchange: RawExchange
    normalized: NormalizedResponse
    cache_key: str
    fetched_at: datetime


@dataclass(frozen=True)
class Context:
    id: str
    title: str
    entries: tuple[ContextEntry, ...] = ()

    @cached_property
    def place_index(self) -> dict[str, Place]:
        """display_name -> Place over all entries; duplicates merged by
        provider-scoped id, first occurrence wins on name collision."""
        by_id: dict[tuple[str, str], Place] = {}
        index: dict[str, Place] = {}
        for entry in self.entries:
            for place in entry.normalized.places:
                key = (place.provider.value, place.id)
                if key in by_id:
                    continue
                by_id[key] = place
                index.setdefault(place.display_name, place)
        return index

    @cached_property
    def places_by_id(self) -> dict[str, Place]:
        out: dict[str, Place] = {}
        for entry in self.entries:
            for place in entry.normalized.places:
                out.setdefault(place.id, place)
        return out

    @property
    def audit_chain(self) -> tuple[str, ...]:
        """Hash chain over entry content in append order."""
        chain: list[str] = []
        prev = ""
        for entry in self.entries:
            h = hashlib.sha256((prev + entry_digest(entry)).encode("ascii")).hexdigest()
            chain.append(h)
            prev = h
        return tuple(chain)


@dataclass(frozen=True)
class ContextStats:
    structured_chars: int
    formatted_chars: int

    @property
    def reduction_pct(self) -> float:
        return reduction_pct(self.structured_chars, self.formatted_chars)


def reduction_pct(structured_chars: int, formatted_chars: int) -> float:
    if structured_chars <= 0:
        raise ValueError("structured_chars must be positive")
    return 100.0 * (structured_chars - formatted_chars) / structured_chars


def append_entry(
    ctx: Context,
    *,
    tool: Tool,
    provider: Provider,
    unified_query: UnifiedQuery,
    exchange: RawExchange,
    normalized: NormalizedResponse,
    cache_key: str,
) -> Context:
    """Return a new context with the entry appended; prior entries are
    shared, never mutated. Sequence numbers stay dense."""
    entry = ContextEntry(
        sequence_no=len(ctx.entries) + 1,
        tool=tool,
        provider=provider,
        unified_query=unified_query,
        exchange=exchange,
        normalized=normalized,
        cache_key=cache_key,
        fetched_at=exchange.fetched_at,
    )
    return Context(id=ctx.id, title=ctx.title, entries=ctx.entries + (entry,))


def entry_to_json(entry: ContextEntry) -> dict:
    raw: dict
    try:
        raw = {"json": json.loads(entry.exchange.raw_response.decode("utf-8"))}
    except (UnicodeDecodeError, json.JSONDecodeError):
        raw = {"base64": base64.b64encode(entry.exchange.raw_response).decode("ascii")}
    doc = {
        "sequence_no": entry.sequence_no,
        "tool": entry.tool.value,
        "provider": entry.provider.value,
        "query": entry.unified_query.parameters,
        "request": entry.exchange.request_template.to_json(),
        "status": entry.exchange.status,
        "latency_ms": entry.exchange.latency_ms,
        "fetched_at": format_timestamp(entry.fetched_at),
        "cache_key": entry.cache_key,
        "raw_response": raw,
        "normalized": normalized_to_json(entry.normalized),
    }
    if entry.tool is Tool.NEARBY_SEARCH:
        doc["derived"] = {"distance_source": "computed"}
    return doc


def entry_digest(entry: ContextEntry) -> str:
    return hashlib.sha256(canonical_dumps(entry_to_json(entry)).encode("utf-8")).hexdigest()


def render_structured(ctx: Context) -> str:
    """Canonical JSON over all layers: sorted keys, stable number
    formatting, byte-deterministic for equal contexts."""
    doc = {
        "id": ctx.id,
        "title": ctx.title,
        "entries": [entry_to_json(e) for e in ctx.entries],
    }
    return canonical_dumps(doc)


def render_formatted(ctx: Context) -> str:
    """Compact plain-text rendering: one titled block per entry, every
    answerable fact present, no ids, raw JSON, or provider metadata."""
    blocks = [format_entry_block(entry, ctx) for entry in ctx.entries]
    return "\n\n".join(blocks)


def context_stats(ctx: Context) -> ContextStats:
    if not ctx.entries:
        raise EmptyContext(f"context {ctx.id} has no entries")
    return ContextStats(
        structured_chars=len(render_structured(ctx)),
        formatted_chars=len(render_formatted(ctx)),
    )


def suggest_places(ctx: Context, prefix: str) -> list[str]:
    """Names from the context's place index matching the prefix,
    case-insensitive, alphabetical. Only context places are offered."""
    lowered = prefix.casefold()
    names = [n for n in ctx.place_index if n.casefold().startswith(lowered)]
    return sorted(names)


# --- formatted-block rendering ------------------------------------------


def format_entry_block(entry: ContextEntry, ctx: Context) -> str:
    """Formatted block for a single entry; render_formatted joins these."""
    if entry.tool is Tool.TEXT_SEARCH:
        return _format_text_search(entry)
    if entry.tool is Tool.PLACE_DETAILS:
        return _format_place_details(entry)
    if entry.tool is Tool.NEARBY_SEARCH:
        return _format_nearby(entry, ctx)
    if entry.tool is Tool.COMPUTE_ROUTES:
        return _format_routes(entry, ctx)
    return _format_along_route(entry)


def _place_info(place: Place) -> str:
    parts = [place.short_address]
    if place.rating is not None:
        parts.append(f"rating {place.rating}")
    return ", ".join(parts)


def _format_text_search(entry: ContextEntry) -> str:
    lines = [
        _template("place_line").substitute(name=p.display_name, info=_place_info(p))
        for p in entry.normalized.places
    ]
    return _template("text_search").substitute(
        query=entry.unified_query.get("query", ""),
        lines="\n".join(lines) if lines else "(no results)",
    )


def _format_place_details(entry: ContextEntry) -> str:
    blocks = []
    for place in entry.normalized.places:
        fields = [f"Address: {place.short_address}"]
        if place.rating is not None:
            fields.append(f"Rating: {place.rating}")
        if place.price_level is not None:
            fields.append(f"Price level: {place.price_level}")
        if place.opening_hours:
            fields.append("Opening hours:")
            fields.extend(f"  {line}" for line in place.opening_hours)
        if place.accessibility:
            fields.append("Accessibility: " + ", ".join(place.accessibility))
        if place.reviews:
            fields.append("Reviews:")
            fields.extend(f"  \"{review}\"" for review in place.reviews)
        blocks.append(
            _template("place_details").substitute(
                name=place.display_name, fields="\n".join(fields)
            )
        )
    return "\n\n".join(blocks) if blocks else "(no details)"


def _anchor_of(entry: ContextEntry, ctx: Context) -> tuple[str, LatLng | None]:
    anchor_id = entry.unified_query.get("anchor_place_id")
    location = entry.unified_query.get("anchor_location")
    point = None
    if isinstance(location, dict) and "latitude" in location:
        point = LatLng(float(location["latitude"]), float(location["longitude"]))
    if anchor_id and anchor_id in ctx.places_by_id:
        return ctx.places_by_id[anchor_id].display_name, point
    if point is not None:
        return f"{point.latitude:.4f},{point.longitude:.4f}", point
    return "the anchor", None


def _format_nearby(entry: ContextEntry, ctx: Context) -> str:
    anchor_label, anchor_point = _anchor_of(entry, ctx)
    places = list(entry.normalized.places)
    distances: dict[str, int] = {}
    if anchor_point is not None:
        distances = {
            p.id: round(haversine_distance(anchor_point, p.location)) for p in places
        }
        if entry.unified_query.get("ranking", "distance") == "distance":
            places.sort(key=lambda p: (distances[p.id], p.display_name))
    lines = []
    for rank, place in enumerate(places, start=1):
        details = []
        if place.rating is not None:
            details.append(f"rating {place.rating}")
        if place.price_level is not None:
            details.append(f"price {place.price_level}")
        if place.id in distances:
            details.append(f"{distances[place.id]} m")
        lines.append(
            _template("nearby_line").substitute(
                rank=rank,
                name=place.display_name,
                details=", ".join(details) if details else place.short_address,
            )
        )
    return _template("nearby").substitute(
        category=entry.unified_query.get("category", "places"),
        anchor=anchor_label,
        lines="\n".join(lines) if lines else "(no results)",
    )


def _endpoint_label(endpoint: LatLng | str, ctx: Context) -> str:
    if isinstance(endpoint, LatLng):
        return f"{endpoint.latitude:.4f},{endpoint.longitude:.4f}"
    if endpoint in ctx.places_by_id:
        return ctx.places_by_id[endpoint].display_name
    return ""


def _format_routes(entry: ContextEntry, ctx: Context) -> str:
    routes = entry.normalized.routes
    lines = []
    for rank, route in enumerate(routes, start=1):
        via = ""
        names = [
            ctx.places_by_id[i].display_name
            for i in route.intermediates
            if i in ctx.places_by_id
        ]
        if names:
            via = ", via " + ", ".join(names)
        steps = "\n".join(
            _template("step_line").substitute(
                instruction=s.instruction, meters=s.distance_meters
            )
            for s in route.steps
        )
        lines.append(
            _template("route_block").substitute(
                rank=rank,
                km=f"{route.distance_meters / 1000:.1f}",
                minutes=round(route.duration_seconds / 60),
                via=via,
                steps=steps if steps else "  (no step details)",
            )
        )
    endpoints = ""
    if routes:
        origin = _endpoint_label(routes[0].origin, ctx)
        destination = _endpoint_label(routes[0].destination, ctx)
        if origin and destination:
            endpoints = f"from {origin} to {destination} "
    mode = routes[0].travel_mode if routes else entry.unified_query.get("travel_mode", "DRIVE")
    return _template("routes").substitute(
        endpoints=endpoints,
        mode=mode,
        lines="\n\n".join(lines) if lines else "(no routes)",
    )


def _format_along_route(entry: ContextEntry) -> str:
    lines = [
        _template("nearby_line").substitute(
            rank=rank, name=p.display_name, details=_place_info(p)
        )
        for rank, p in enumerate(entry.normalized.places, start=1)
    ]
    return _template("along_route").substitute(
        query=entry.unified_query.get("query", ""),
        lines="\n".join(lines) if lines else "(no results)",
    )
