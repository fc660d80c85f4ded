"""Provider adapters and the default registry."""

from __future__ import annotations

from ..model import Provider, Tool
from .base import (
    SUPPORTED_PAIRS,
    UNIFIED_PARAMS,
    AdapterDescriptor,
    AdapterRegistry,
    NormalizedResponse,
    RequestTemplate,
    ToolAdapter,
    UnifiedQuery,
    dig,
    endpoint_from_param,
    normalize_route_request,
    query_digest,
    validate_normalized,
)

__all__ = [
    "SUPPORTED_PAIRS",
    "UNIFIED_PARAMS",
    "AdapterDescriptor",
    "AdapterRegistry",
    "NormalizedResponse",
    "RequestTemplate",
    "ToolAdapter",
    "UnifiedQuery",
    "default_registry",
    "dig",
    "endpoint_from_param",
    "normalize_route_request",
    "query_digest",
    "validate_normalized",
]


def default_registry() -> AdapterRegistry:
    """Build the registry shipped with this toolkit.

    Google, TomTom, OpenStreetMap, and replay adapters are implemented;
    Mapbox/HERE/Azure pairs are reserved stubs that fail lookup until an
    adapter lands.
    """
    from . import google, osm, replay, tomtom

    registry = AdapterRegistry()
    for module in (google, tomtom, osm, replay):
        for adapter in module.ADAPTERS:
            registry.register(adapter)
    for provider in (Provider.MAPBOX, Provider.HERE, Provider.AZURE):
        for tool in (Tool.TEXT_SEARCH, Tool.PLACE_DETAILS):
            registry.register_stub(provider, tool, "adapter not implemented yet")
    return registry
