"""Recorded exchanges and the on-disk fixture store.

A fixture is one JSON document per exchange: provider, tool, the
unified query, the request template in placeholder form, the raw
response bytes (base64), and the recording timestamp. Fixture files are
named by the request's canonical cache key, so the replay gateway and
the response cache address the same corpus interchangeably.
"""

from __future__ import annotations

import base64
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from .adapters.base import RequestTemplate, UnifiedQuery
from .jsonutil import canonical_dumps
from .model import Provider, Tool
from .serialize import format_timestamp, parse_timestamp


@dataclass(frozen=True)
class RawExchange:
    """One request/response exchange, request kept in placeholder form."""

    request_template: RequestTemplate
    status: int
    raw_response: bytes
    latency_ms: int
    fetched_at: datetime


@dataclass(frozen=True)
class Fixture:
    provider: Provider
    tool: Tool
    unified_query: UnifiedQuery
    exchange: RawExchange

    def to_json(self) -> dict:
        return {
            "provider": self.provider.value,
            "tool": self.tool.value,
            "unified_query": {
                "tool": self.unified_query.tool.value,
                "parameters": self.unified_query.parameters,
            },
            "request_template": self.exchange.request_template.to_json(),
            "status": self.exchange.status,
            "raw_response_base64": base64.b64encode(self.exchange.raw_response).decode("ascii"),
            "recorded_at": format_timestamp(self.exchange.fetched_at),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Fixture":
        query = UnifiedQuery(
            tool=Tool(doc["unified_query"]["tool"]),
            parameters=dict(doc["unified_query"]["parameters"]),
        )
        exchange = RawExchange(
            request_template=RequestTemplate.from_json(doc["request_template"]),
            status=int(doc.get("status", 200)),
            raw_response=base64.b64decode(doc["raw_response_base64"]),
            latency_ms=0,
            fetched_at=parse_timestamp(doc["recorded_at"]),
        )
        return cls(
            provider=Provider(doc["provider"]),
            tool=Tool(doc["tool"]),
            unified_query=query,
            exchange=exchange,
        )


class FixtureStore:
    """Directory of fixture files, one ``<cache-key>.json`` per exchange."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def path_for(self, key: str) -> Path:
        return self.root / f"{key}.json"

    def load(self, key: str) -> Fixture | None:
        path = self.path_for(key)
        if not path.exists():
            return None
        import json

        return Fixture.from_json(json.loads(path.read_text("utf-8")))

    def save(self, key: str, fixture: Fixture) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        path = self.path_for(key)
        path.write_text(canonical_dumps(fixture.to_json()) + "\n", "utf-8")
        return path

    def keys(self) -> list[str]:
        if not self.root.is_dir():
            return []
        return sorted(p.stem for p in self.root.glob("*.json"))

    def __len__(self) -> int:
        return len(self.keys())
