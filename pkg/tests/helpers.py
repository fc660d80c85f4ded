"""Shared builders for synthetic contexts (no fixture corpus needed)."""

from __future__ import annotations

def make_place(idx: int = 1, **overrides):
    from geoqa.model import LatLng, Place, Provider

    kwargs = dict(
        id=f"p{idx}",
        display_name=f"Place {idx}",
        short_address=f"{idx} Example Street",
        location=LatLng(48.85 + idx * 0.001, 2.29 + idx * 0.001),
        provider=Provider.REPLAY,
    )
    kwargs.update(overrides)
    return Place(**kwargs)


def make_entry_payload(tool, places=(), routes=()):
    """Raw payload + normalized response in the replay provider's form."""
    from geoqa.adapters.base import NormalizedResponse
    from geoqa.cache import normalized_to_json
    from geoqa.jsonutil import canonical_bytes

    normalized = NormalizedResponse(kind=tool, places=tuple(places), routes=tuple(routes))
    return canonical_bytes(normalized_to_json(normalized)), normalized


def append_synthetic(ctx, tool, parameters, places=(), routes=(), minute=0):
    from geoqa.adapters import UnifiedQuery
    from geoqa.adapters.base import RequestTemplate
    from geoqa.context import append_entry
    from geoqa.exchange import RawExchange
    from geoqa.model import Provider
    from geoqa.serialize import parse_timestamp

    raw, normalized = make_entry_payload(tool, places, routes)
    query = UnifiedQuery(tool, dict(parameters))
    template = RequestTemplate(url=f"replay://test-{tool.value}", method="GET")
    exchange = RawExchange(
        request_template=template,
        status=200,
        raw_response=raw,
        latency_ms=0,
        fetched_at=parse_timestamp(f"2025-03-01T09:{minute:02d}:00Z"),
    )
    return append_entry(
        ctx,
        tool=tool,
        provider=Provider.REPLAY,
        unified_query=query,
        exchange=exchange,
        normalized=normalized,
        cache_key=f"synthetic-{tool.value}-{len(ctx.entries)}",
    )
