"""Replay pseudo-provider: serves recorded payloads for every tool.

Templates address the fixture store directly (``replay://<digest>``),
so the entire workflow can run without touching any real provider. The
payload format is the canonical JSON of a normalized response, which
makes hand-written fixtures trivial.
"""

from __future__ import annotations

from ..model import TRAFFIC_UNAWARE, ROUTE_TOOLS, Provider, Tool
from .base import (
    UNIFIED_PARAMS,
    AdapterDescriptor,
    NormalizedResponse,
    RequestTemplate,
    ToolAdapter,
    UnifiedQuery,
    parse_replay_payload,
    query_digest,
)


class ReplayAdapter(ToolAdapter):
    def __init__(self, tool: Tool):
        self.descriptor = AdapterDescriptor(
            provider=Provider.REPLAY,
            tool=tool,
            family="replay",
            allowed_params=UNIFIED_PARAMS,
            polyline_precision=5,
        )

    def convert_request(self, query: UnifiedQuery) -> RequestTemplate:
        self.check_query(query)
        params = {}
        if query.tool in ROUTE_TOOLS:
            params["trafficAwareness"] = TRAFFIC_UNAWARE
        return RequestTemplate(
            url=f"replay://{query_digest(query)}",
            method="GET",
            query_params=params,
        )

    def convert_response(self, raw: bytes, query: UnifiedQuery | None = None) -> NormalizedResponse:
        return parse_replay_payload(self.descriptor.tool, raw)


ADAPTERS = tuple(ReplayAdapter(tool) for tool in Tool)
