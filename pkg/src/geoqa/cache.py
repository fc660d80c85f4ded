"""Persistent, secret-free cache of API exchanges.

Keys are SHA-256 digests of the request's canonical identity in
placeholder form: no secret ever influences a key. The store is a
single SQLite file: transactional, durable across restarts, with a
checksum per row so corruption is detected on read. Nothing is ever
evicted automatically; the cache IS the ground truth a dataset was
authored against.
"""

from __future__ import annotations

import hashlib
import json
import sqlite3
import threading
from dataclasses import dataclass
from pathlib import Path

from .adapters.base import NormalizedResponse, RequestTemplate, ToolAdapter, UnifiedQuery
from .errors import CorruptEntry, StorageUnavailable
from .exchange import Fixture, FixtureStore, RawExchange
from .jsonutil import canonical_dumps
from .model import Provider, Tool
from .serialize import (
    format_timestamp,
    parse_timestamp,
    place_from_json,
    place_to_json,
    route_from_json,
    route_to_json,
)

SCHEMA_VERSION = 1


def canonical_key(template: RequestTemplate, provider: Provider, tool: Tool) -> str:
    """Digest of the request identity; query-param order never matters.

    Only placeholder-form templates may be keyed: passing a resolved
    request is a programming error, rejected by type.
    """
    if not isinstance(template, RequestTemplate):
        raise TypeError(f"canonical_key requires RequestTemplate, got {type(template).__name__}")
    doc = {
        "provider": provider.value,
        "tool": tool.value,
        "method": template.method,
        "url": template.url,
        "query_params": dict(sorted(template.query_params.items())),
        "body": template.body,
    }
    return hashlib.sha256(canonical_dumps(doc).encode("utf-8")).hexdigest()


def normalized_to_json(resp: NormalizedResponse) -> dict:
    return {
        "kind": resp.kind.value,
        "places": [place_to_json(p) for p in resp.places],
        "routes": [route_to_json(r) for r in resp.routes],
    }


def normalized_from_json(doc: dict) -> NormalizedResponse:
    return NormalizedResponse(
        kind=Tool(doc["kind"]),
        places=tuple(place_from_json(p) for p in doc.get("places", [])),
        routes=tuple(route_from_json(r) for r in doc.get("routes", [])),
    )


@dataclass(frozen=True)
class CacheEntry:
    key: str
    provider: Provider
    tool: Tool
    unified_query: UnifiedQuery
    exchange: RawExchange
    normalized: NormalizedResponse
    schema_version: int = SCHEMA_VERSION


def make_entry(
    adapter: ToolAdapter,
    unified_query: UnifiedQuery,
    exchange: RawExchange,
) -> CacheEntry:
    """Build an entry whose normalized payload is recomputed from raw,
    so the entry invariant holds by construction."""
    d = adapter.descriptor
    return CacheEntry(
        key=canonical_key(exchange.request_template, d.provider, d.tool),
        provider=d.provider,
        tool=d.tool,
        unified_query=unified_query,
        exchange=exchange,
        normalized=adapter.convert_response(exchange.raw_response, unified_query),
    )


def _checksum(raw: bytes, normalized_json: str) -> str:
    h = hashlib.sha256()
    h.update(raw)
    h.update(normalized_json.encode("utf-8"))
    return h.hexdigest()


class ResponseCache:
    """SQLite-backed exchange cache. Concurrent readers, serialized writes."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.RLock()
        self.hits = 0
        self.misses = 0
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._conn = sqlite3.connect(str(self.path), check_same_thread=False)
            self._conn.execute(
                """
                CREATE TABLE IF NOT EXISTS entries (
                    key TEXT PRIMARY KEY,
                    provider TEXT NOT NULL,
                    tool TEXT NOT NULL,
                    unified_query TEXT NOT NULL,
                    request_template TEXT NOT NULL,
                    status INTEGER NOT NULL,
                    raw_response BLOB NOT NULL,
                    latency_ms INTEGER NOT NULL,
                    fetched_at TEXT NOT NULL,
                    normalized TEXT NOT NULL,
                    schema_version INTEGER NOT NULL,
                    checksum TEXT NOT NULL
                )
                """
            )
            self._conn.commit()
        except sqlite3.Error as exc:
            raise StorageUnavailable(f"cannot open cache at {self.path}: {exc}") from exc

    def close(self) -> None:
        self._conn.close()

    def get(self, key: str) -> CacheEntry | None:
        with self._lock:
            try:
                row = self._conn.execute(
                    "SELECT provider, tool, unified_query, request_template, status,"
                    " raw_response, latency_ms, fetched_at, normalized, schema_version,"
                    " checksum FROM entries WHERE key = ?",
                    (key,),
                ).fetchone()
            except sqlite3.Error as exc:
                raise StorageUnavailable(str(exc)) from exc
            if row is None:
                self.misses += 1
                return None
            if _checksum(row[5], row[8]) != row[10]:
                raise CorruptEntry(key)
            self.hits += 1
            return CacheEntry(
                key=key,
                provider=Provider(row[0]),
                tool=Tool(row[1]),
                unified_query=_query_from_json(json.loads(row[2])),
                exchange=RawExchange(
                    request_template=RequestTemplate.from_json(json.loads(row[3])),
                    status=row[4],
                    raw_response=row[5],
                    latency_ms=row[6],
                    fetched_at=parse_timestamp(row[7]),
                ),
                normalized=normalized_from_json(json.loads(row[8])),
                schema_version=row[9],
            )

    def put(self, entry: CacheEntry) -> None:
        normalized_json = canonical_dumps(normalized_to_json(entry.normalized))
        with self._lock:
            try:
                self._conn.execute(
                    "INSERT OR REPLACE INTO entries VALUES (?,?,?,?,?,?,?,?,?,?,?,?)",
                    (
                        entry.key,
                        entry.provider.value,
                        entry.tool.value,
                        canonical_dumps(_query_to_json(entry.unified_query)),
                        canonical_dumps(entry.exchange.request_template.to_json()),
                        entry.exchange.status,
                        entry.exchange.raw_response,
                        entry.exchange.latency_ms,
                        format_timestamp(entry.exchange.fetched_at),
                        normalized_json,
                        entry.schema_version,
                        _checksum(entry.exchange.raw_response, normalized_json),
                    ),
                )
                self._conn.commit()
            except sqlite3.Error as exc:
                raise StorageUnavailable(str(exc)) from exc

    def stats(self) -> dict:
        with self._lock:
            entries, total_bytes = self._conn.execute(
                "SELECT COUNT(*), COALESCE(SUM(LENGTH(raw_response)), 0) FROM entries"
            ).fetchone()
        return {
            "hits": self.hits,
            "misses": self.misses,
            "entries": entries,
            "bytes": total_bytes,
        }

    def purge(self) -> int:
        """Explicit wipe; never called automatically."""
        with self._lock:
            count = self._conn.execute("SELECT COUNT(*) FROM entries").fetchone()[0]
            self._conn.execute("DELETE FROM entries")
            self._conn.commit()
        return count

    def keys(self) -> list[str]:
        with self._lock:
            return [r[0] for r in self._conn.execute("SELECT key FROM entries ORDER BY key")]

    def export_fixtures(self, store: FixtureStore) -> int:
        """Write every entry as a fixture file; returns the count."""
        count = 0
        for key in self.keys():
            entry = self.get(key)
            store.save(key, Fixture(entry.provider, entry.tool, entry.unified_query, entry.exchange))
            count += 1
        return count

    def import_fixtures(self, store: FixtureStore, registry) -> int:
        """Load fixture files as cache entries, recomputing normalization."""
        count = 0
        for key in store.keys():
            fixture = store.load(key)
            adapter = registry.lookup(fixture.provider, fixture.tool)
            self.put(make_entry(adapter, fixture.unified_query, fixture.exchange))
            count += 1
        return count


def _query_to_json(q: UnifiedQuery) -> dict:
    return {"tool": q.tool.value, "parameters": q.parameters}


def _query_from_json(doc: dict) -> UnifiedQuery:
    return UnifiedQuery(tool=Tool(doc["tool"]), parameters=dict(doc["parameters"]))
