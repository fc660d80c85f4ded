"""Unified query/template types and the adapter base classes.

A provider is wired in by subclassing :class:`ToolAdapter` for each tool
it supports and implementing ``convert_request`` / ``convert_response``.
Adapters are pure: identical queries yield byte-identical request
templates, which is what the whole reproducibility chain hangs on.
"""

from __future__ import annotations

import hashlib
import json
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

from ..errors import (
    MalformedProviderResponse,
    UnsupportedPair,
    UnsupportedParameter,
)
from ..jsonutil import canonical_dumps
from ..model import (
    EXCLUDED_TRAVEL_MODE,
    ROUTE_TOOLS,
    TRAFFIC_UNAWARE,
    TRAVEL_MODES,
    LatLng,
    Place,
    Provider,
    RouteResult,
    Tool,
)
from ..serialize import place_from_json, route_from_json

# Every parameter name a unified query may carry, across all tools.
# Individual adapters restrict this to their own allowed_params.
UNIFIED_PARAMS = frozenset(
    {
        "query",
        "place_id",
        "anchor_place_id",
        "anchor_location",
        "category",
        "radius_m",
        "min_rating",
        "price_levels",
        "ranking",
        "origin",
        "destination",
        "intermediates",
        "travel_mode",
        "alternatives",
        "traffic_awareness",
        "route_polyline",
        "limit",
        "language",
    }
)

_PLACEHOLDER_RE = re.compile(r"^key:[A-Z][A-Z0-9_]*$")


@dataclass(frozen=True)
class UnifiedQuery:
    """Provider-agnostic parameters for one tool invocation."""

    tool: Tool
    parameters: dict[str, Any] = field(default_factory=dict)

    def get(self, name: str, default: Any = None) -> Any:
        return self.parameters.get(name, default)


@dataclass(frozen=True)
class RequestTemplate:
    """An HTTP request in placeholder form: secrets never appear here.

    Query-parameter values of the form ``key:ENV_NAME`` are credential
    placeholders resolved by the gateway at send time.
    """

    url: str
    method: str
    query_params: dict[str, str] = field(default_factory=dict)
    body: dict | None = None

    def placeholders(self) -> list[str]:
        """Environment-variable names referenced by this template."""
        names = []
        for value in self.query_params.values():
            if isinstance(value, str) and _PLACEHOLDER_RE.match(value):
                names.append(value.split(":", 1)[1])
        return names

    def to_json(self) -> dict:
        return {
            "url": self.url,
            "method": self.method,
            "query_params": dict(self.query_params),
            "body": self.body,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RequestTemplate":
        return cls(
            url=obj["url"],
            method=obj["method"],
            query_params=dict(obj.get("query_params", {})),
            body=obj.get("body"),
        )


@dataclass(frozen=True)
class NormalizedResponse:
    """Provider response mapped into the unified schema."""

    kind: Tool
    places: tuple[Place, ...] = ()
    routes: tuple[RouteResult, ...] = ()


def validate_normalized(resp: NormalizedResponse) -> list[str]:
    """Check which payload lists a tool is allowed to populate."""
    violations = []
    if resp.kind in (Tool.TEXT_SEARCH, Tool.PLACE_DETAILS, Tool.NEARBY_SEARCH):
        if resp.routes:
            violations.append(f"{resp.kind.value} must not populate routes")
    elif resp.kind is Tool.COMPUTE_ROUTES:
        if resp.places:
            violations.append("compute-routes must not populate places")
    return violations


@dataclass(frozen=True)
class AdapterDescriptor:
    provider: Provider
    tool: Tool
    family: str
    allowed_params: frozenset[str]
    polyline_precision: int | None = None
    category_vocabulary: tuple[tuple[str, str], ...] | None = None


def load_category_vocabulary(name: str) -> tuple[tuple[str, str], ...]:
    """Load a provider's POI category list from its bundled data file."""
    text = resources.files("geoqa.adapters").joinpath(f"data/{name}.json").read_text("utf-8")
    return tuple((item["code"], item["label"]) for item in json.loads(text))


class ToolAdapter(ABC):
    """Base class binding one provider to one tool.

    Subclasses set :attr:`descriptor` and implement the two conversion
    methods. ``check_query`` is called by ``convert_request`` to enforce
    the shared preconditions before any provider-specific work.
    """

    descriptor: AdapterDescriptor

    @abstractmethod
    def convert_request(self, query: UnifiedQuery) -> RequestTemplate:
        ...

    @abstractmethod
    def convert_response(
        self, raw: bytes, query: UnifiedQuery | None = None
    ) -> NormalizedResponse:
        """Map a raw provider payload into the unified schema.

        Route adapters need the originating ``query`` because providers
        do not echo origin/destination in their responses; both raw and
        query are persisted with each exchange, so the mapping stays a
        pure function of stored data.
        """

    def check_query(self, query: UnifiedQuery) -> None:
        d = self.descriptor
        if query.tool is not d.tool:
            raise UnsupportedParameter(
                "tool", f"query is {query.tool.value}, adapter is {d.tool.value}"
            )
        for name in query.parameters:
            if name not in d.allowed_params:
                raise UnsupportedParameter(name, f"not accepted by {d.family} {d.tool.value}")
        mode = query.get("travel_mode")
        if mode == EXCLUDED_TRAVEL_MODE:
            raise UnsupportedParameter("travel_mode", "TRANSIT is excluded")
        if mode is not None and mode not in TRAVEL_MODES:
            raise UnsupportedParameter("travel_mode", f"unknown mode {mode}")

    def parse_json(self, raw: bytes) -> Any:
        try:
            return json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise MalformedProviderResponse("", f"not valid JSON: {exc}") from exc


def normalize_route_request(query: UnifiedQuery) -> UnifiedQuery:
    """Pin route queries to the reproducible regime.

    Forces ``traffic_awareness`` to TRAFFIC_UNAWARE (idempotent) and
    rejects the TRANSIT travel mode outright.
    """
    if query.tool not in ROUTE_TOOLS:
        raise ValueError(f"not a route tool: {query.tool.value}")
    if query.get("travel_mode") == EXCLUDED_TRAVEL_MODE:
        raise UnsupportedParameter("travel_mode", "TRANSIT is excluded")
    if query.get("traffic_awareness") == TRAFFIC_UNAWARE:
        return query
    params = dict(query.parameters)
    params["traffic_awareness"] = TRAFFIC_UNAWARE
    return UnifiedQuery(query.tool, params)


def query_digest(query: UnifiedQuery) -> str:
    """Canonical identity of a unified query, independent of dict order."""
    doc = {"tool": query.tool.value, "parameters": query.parameters}
    return hashlib.sha256(canonical_dumps(doc).encode("utf-8")).hexdigest()


def dig(obj: Any, path: str, root: str = "") -> Any:
    """Fetch a value at a dotted/indexed path like ``results[0].poi.name``.

    Raises :class:`MalformedProviderResponse` naming the exact JSON path
    that failed (prefixed with ``root`` when ``obj`` is a subdocument),
    which is what error reports show to annotators.
    """
    current = obj
    walked = root
    for part in re.findall(r"[^.\[\]]+|\[\d+\]", path):
        if part.startswith("["):
            index = int(part[1:-1])
            walked += part
            if not isinstance(current, list) or index >= len(current):
                raise MalformedProviderResponse(walked, "missing list element")
            current = current[index]
        else:
            walked = f"{walked}.{part}" if walked else part
            if not isinstance(current, dict) or part not in current:
                raise MalformedProviderResponse(walked, "missing field")
            current = current[part]
    return current


def endpoint_from_param(value: Any) -> LatLng | str:
    """Map a query's origin/destination parameter to the domain form."""
    if isinstance(value, dict):
        if "place_id" in value:
            return str(value["place_id"])
        if "latitude" in value and "longitude" in value:
            return LatLng(float(value["latitude"]), float(value["longitude"]))
    if isinstance(value, str):
        return value
    raise UnsupportedParameter("origin", "expected {place_id} or {latitude, longitude}")


# (provider, tool) pairs that may register an adapter: the published
# support matrix plus the replay pseudo-provider.
SUPPORTED_PAIRS = frozenset(
    {
        (Provider.GOOGLE, Tool.TEXT_SEARCH),
        (Provider.GOOGLE, Tool.PLACE_DETAILS),
        (Provider.GOOGLE, Tool.NEARBY_SEARCH),
        (Provider.GOOGLE, Tool.COMPUTE_ROUTES),
        (Provider.GOOGLE, Tool.SEARCH_ALONG_ROUTE),
        (Provider.OPENSTREETMAP, Tool.TEXT_SEARCH),
        (Provider.OPENSTREETMAP, Tool.PLACE_DETAILS),
        (Provider.OPENSTREETMAP, Tool.COMPUTE_ROUTES),
        (Provider.MAPBOX, Tool.TEXT_SEARCH),
        (Provider.MAPBOX, Tool.PLACE_DETAILS),
        (Provider.TOMTOM, Tool.TEXT_SEARCH),
        (Provider.TOMTOM, Tool.PLACE_DETAILS),
        (Provider.TOMTOM, Tool.NEARBY_SEARCH),
        (Provider.TOMTOM, Tool.COMPUTE_ROUTES),
        (Provider.TOMTOM, Tool.SEARCH_ALONG_ROUTE),
        (Provider.HERE, Tool.TEXT_SEARCH),
        (Provider.HERE, Tool.PLACE_DETAILS),
        (Provider.AZURE, Tool.TEXT_SEARCH),
        (Provider.AZURE, Tool.PLACE_DETAILS),
    }
    | {(Provider.REPLAY, tool) for tool in Tool}
)


class AdapterRegistry:
    """Startup-built, thereafter read-only map of (provider, tool) adapters."""

    def __init__(self) -> None:
        self._adapters: dict[tuple[Provider, Tool], ToolAdapter] = {}
        self._stubs: dict[tuple[Provider, Tool], str] = {}

    def register(self, adapter: ToolAdapter) -> None:
        d = adapter.descriptor
        pair = (d.provider, d.tool)
        if pair not in SUPPORTED_PAIRS:
            raise UnsupportedPair(d.provider.value, d.tool.value, "pair not in support matrix")
        if pair in self._adapters:
            raise UnsupportedPair(d.provider.value, d.tool.value, "already registered")
        self._adapters[pair] = adapter

    def register_stub(self, provider: Provider, tool: Tool, reason: str) -> None:
        """Reserve a supported pair whose adapter is not implemented yet."""
        pair = (provider, tool)
        if pair not in SUPPORTED_PAIRS:
            raise UnsupportedPair(provider.value, tool.value, "pair not in support matrix")
        self._stubs[pair] = reason

    def lookup(self, provider: Provider, tool: Tool) -> ToolAdapter:
        pair = (provider, tool)
        adapter = self._adapters.get(pair)
        if adapter is not None:
            return adapter
        if pair in self._stubs:
            raise UnsupportedPair(provider.value, tool.value, self._stubs[pair])
        raise UnsupportedPair(provider.value, tool.value)

    def pairs(self) -> list[tuple[Provider, Tool]]:
        return sorted(self._adapters, key=lambda p: (p[0].value, p[1].value))


def parse_replay_payload(kind: Tool, raw: bytes) -> NormalizedResponse:
    """Decode the replay provider's payload: normalized records as JSON."""
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedProviderResponse("", f"not valid JSON: {exc}") from exc
    try:
        places = tuple(place_from_json(p) for p in doc.get("places", []))
        routes = tuple(route_from_json(r) for r in doc.get("routes", []))
    except (KeyError, ValueError, TypeError) as exc:
        raise MalformedProviderResponse("places", str(exc)) from exc
    return NormalizedResponse(kind=kind, places=places, routes=routes)
