from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from geoqa.adapters import UnifiedQuery
from geoqa.adapters.base import RequestTemplate
from geoqa.errors import (
    MissingCredential,
    ProviderError,
    ProviderUnavailable,
    ReplayMiss,
)
from geoqa.exchange import Fixture, FixtureStore, RawExchange
from geoqa.gateway import Gateway, _TokenBucket, inject_credentials
from geoqa.cache import canonical_key
from geoqa.model import Provider, Tool
from geoqa.serialize import parse_timestamp

QUERY = UnifiedQuery(Tool.TEXT_SEARCH, {"query": "louvre"})


def template(**overrides) -> RequestTemplate:
    kwargs = dict(
        url="https://api.tomtom.com/search/2/poiSearch/louvre.json",
        method="GET",
        query_params={"key": "key:TOMTOM_API_KEY", "limit": "5"},
    )
    kwargs.update(overrides)
    return RequestTemplate(**kwargs)


class TestInjectCredentials:
    def test_placeholder_substituted_exactly(self):
        resolved = inject_credentials(template(), {"TOMTOM_API_KEY": "s3cr3t"})
        assert resolved.query_params == {"key": "s3cr3t", "limit": "5"}

    def test_no_placeholders_is_identity(self):
        t = template(query_params={"limit": "5"})
        resolved = inject_credentials(t, {})
        assert resolved.query_params == {"limit": "5"}
        assert resolved.url == t.url

    def test_missing_credential_named(self):
        t = template(query_params={"key": "key:HERE_API_KEY"})
        with pytest.raises(MissingCredential) as exc:
            inject_credentials(t, {})
        assert exc.value.names == ["HERE_API_KEY"]

    def test_all_missing_names_listed_before_any_send(self):
        t = template(query_params={"a": "key:FIRST_KEY", "b": "key:SECOND_KEY"})
        with pytest.raises(MissingCredential) as exc:
            inject_credentials(t, {})
        assert exc.value.names == ["FIRST_KEY", "SECOND_KEY"]

    def test_repr_never_shows_values(self):
        resolved = inject_credentials(template(), {"TOMTOM_API_KEY": "s3cr3t"})
        assert "s3cr3t" not in repr(resolved)


class TestReplayMode:
    def test_fixture_served_with_zero_latency(self, tmp_path):
        store = FixtureStore(tmp_path)
        t = template()
        key = canonical_key(t, Provider.TOMTOM, Tool.TEXT_SEARCH)
        recorded = RawExchange(
            request_template=t,
            status=200,
            raw_response=b'{"results": []}',
            latency_ms=88,
            fetched_at=parse_timestamp("2025-03-01T09:00:00Z"),
        )
        store.save(key, Fixture(Provider.TOMTOM, Tool.TEXT_SEARCH, QUERY, recorded))

        gateway = Gateway(mode="replay-only", fixtures=store)
        exchange = gateway.execute(
            t, provider=Provider.TOMTOM, tool=Tool.TEXT_SEARCH, unified_query=QUERY
        )
        assert exchange.raw_response == b'{"results": []}'
        assert exchange.latency_ms == 0
        assert exchange.fetched_at == parse_timestamp("2025-03-01T09:00:00Z")
        assert gateway.network_calls == 0

    def test_miss_raises(self, tmp_path):
        gateway = Gateway(mode="replay-only", fixtures=FixtureStore(tmp_path))
        with pytest.raises(ReplayMiss):
            gateway.execute(
                template(),
                provider=Provider.TOMTOM,
                tool=Tool.TEXT_SEARCH,
                unified_query=QUERY,
            )

    def test_replay_is_deterministic_across_runs(self, tmp_path):
        store = FixtureStore(tmp_path)
        t = template()
        key = canonical_key(t, Provider.TOMTOM, Tool.TEXT_SEARCH)
        recorded = RawExchange(
            request_template=t,
            status=200,
            raw_response=b'{"results": [1, 2]}',
            latency_ms=5,
            fetched_at=parse_timestamp("2025-03-01T09:00:00Z"),
        )
        store.save(key, Fixture(Provider.TOMTOM, Tool.TEXT_SEARCH, QUERY, recorded))
        runs = []
        for _ in range(2):
            gateway = Gateway(mode="replay-only", fixtures=FixtureStore(tmp_path))
            runs.append(
                gateway.execute(
                    t, provider=Provider.TOMTOM, tool=Tool.TEXT_SEARCH, unified_query=QUERY
                )
            )
        assert runs[0] == runs[1]


class _StubHandler(BaseHTTPRequestHandler):
    status = 200
    body = b'{"results": []}'

    def do_GET(self):
        self.send_response(self.status)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(self.body)

    def log_message(self, *args):
        pass


@pytest.fixture()
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


class TestLiveMode:
    def test_forbidden_status_preserves_body(self, stub_server):
        _StubHandler.status = 403
        _StubHandler.body = b'{"error": "quota"}'
        try:
            gateway = Gateway(mode="live", env={"TOMTOM_API_KEY": "k"}, rate_limit_per_s=0)
            with pytest.raises(ProviderError) as exc:
                gateway.execute(
                    template(url=f"{stub_server}/x"),
                    provider=Provider.TOMTOM,
                    tool=Tool.TEXT_SEARCH,
                    unified_query=QUERY,
                )
            assert exc.value.status == 403
            assert exc.value.body == b'{"error": "quota"}'
        finally:
            _StubHandler.status = 200
            _StubHandler.body = b'{"results": []}'

    def test_record_then_replay_round_trip(self, stub_server, tmp_path):
        store = FixtureStore(tmp_path)
        t = template(url=f"{stub_server}/poi")
        recorder = Gateway(
            mode="record", fixtures=store, env={"TOMTOM_API_KEY": "sentinel-tt"}, rate_limit_per_s=0
        )
        live = recorder.execute(
            t, provider=Provider.TOMTOM, tool=Tool.TEXT_SEARCH, unified_query=QUERY
        )
        assert recorder.network_calls == 1
        assert len(store) == 1

        replayer = Gateway(mode="replay-only", fixtures=store)
        replayed = replayer.execute(
            t, provider=Provider.TOMTOM, tool=Tool.TEXT_SEARCH, unified_query=QUERY
        )
        assert replayed.raw_response == live.raw_response
        assert replayer.network_calls == 0

    def test_recorded_fixture_is_secret_free(self, stub_server, tmp_path):
        store = FixtureStore(tmp_path)
        sentinel = "sentinel-super-secret-77ab"
        gateway = Gateway(
            mode="record",
            fixtures=store,
            env={"TOMTOM_API_KEY": sentinel},
            rate_limit_per_s=0,
        )
        gateway.execute(
            template(url=f"{stub_server}/poi"),
            provider=Provider.TOMTOM,
            tool=Tool.TEXT_SEARCH,
            unified_query=QUERY,
        )
        for key in store.keys():
            data = store.path_for(key).read_bytes()
            assert sentinel.encode() not in data
            assert b"key:TOMTOM_API_KEY" in data

    def test_transport_failure_retries_then_raises(self, tmp_path):
        sleeps: list[float] = []
        gateway = Gateway(
            mode="live",
            env={"TOMTOM_API_KEY": "k"},
            retries=2,
            rate_limit_per_s=0,
            sleep_fn=sleeps.append,
        )
        # nothing listens on this port
        with pytest.raises(ProviderUnavailable):
            gateway.execute(
                template(url="http://127.0.0.1:9/x"),
                provider=Provider.TOMTOM,
                tool=Tool.TEXT_SEARCH,
                unified_query=QUERY,
            )
        assert gateway.network_calls == 3
        assert sleeps == [0.5, 1.0]


class TestRateLimit:
    def test_token_bucket_spaces_requests(self):
        clock = {"now": 0.0}
        sleeps: list[float] = []

        def sleep(seconds):
            sleeps.append(seconds)
            clock["now"] += seconds

        bucket = _TokenBucket(1.0, time_fn=lambda: clock["now"], sleep_fn=sleep)
        bucket.acquire(Provider.TOMTOM)
        bucket.acquire(Provider.TOMTOM)
        bucket.acquire(Provider.GOOGLE)  # independent per provider
        bucket.acquire(Provider.TOMTOM)
        assert sleeps == [1.0, 1.0]

    def test_mode_validation(self):
        with pytest.raises(ValueError):
            Gateway(mode="offline")
        with pytest.raises(ValueError):
            Gateway(mode="replay-only", fixtures=None)
