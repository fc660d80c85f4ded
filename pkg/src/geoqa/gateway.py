"""The request gateway: the only component that sees secrets or the wire.

Resolves ``key:ENV_NAME`` placeholders from the environment immediately
before sending, never persists or logs the resolved form, and maps
transport and provider failures to typed errors. Three modes:

- ``live``: resolve, rate-limit, send.
- ``record``: live, plus the exchange is written to the fixture store.
- ``replay-only``: zero network I/O; fixtures are the only source, and
  timestamps come from the recording, so replay runs are deterministic.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Mapping

from .adapters.base import RequestTemplate, UnifiedQuery
from .cache import canonical_key
from .errors import MissingCredential, ProviderError, ProviderUnavailable, ReplayMiss
from .exchange import Fixture, FixtureStore, RawExchange
from .model import Provider, Tool
from .serialize import truncate_to_second

MODES = ("live", "record", "replay-only")

_PLACEHOLDER_RE = re.compile(r"^key:([A-Z][A-Z0-9_]*)$")

DEFAULT_TIMEOUT_S = 15.0
DEFAULT_RETRIES = 2
DEFAULT_RATE_PER_S = 1.0


@dataclass
class ResolvedRequest:
    """A template with secrets substituted. In-memory only; its repr
    hides parameter values so accidental logging cannot leak keys."""

    url: str
    method: str
    query_params: dict[str, str] = field(default_factory=dict)
    body: dict | None = None

    def __repr__(self) -> str:  # pragma: no cover - defensive only
        return f"ResolvedRequest(method={self.method!r}, url={self.url!r}, params=<redacted>)"


def inject_credentials(template: RequestTemplate, env: Mapping[str, str]) -> ResolvedRequest:
    """Substitute every placeholder; all missing names are reported at
    once, before any network activity."""
    missing = []
    resolved: dict[str, str] = {}
    for name, value in template.query_params.items():
        match = _PLACEHOLDER_RE.match(value) if isinstance(value, str) else None
        if match:
            env_name = match.group(1)
            if env_name not in env:
                missing.append(env_name)
            else:
                resolved[name] = env[env_name]
        else:
            resolved[name] = value
    if missing:
        raise MissingCredential(sorted(missing))
    return ResolvedRequest(
        url=template.url,
        method=template.method,
        query_params=resolved,
        body=template.body,
    )


class _TokenBucket:
    """Per-provider rate limiter; default one request per second."""

    def __init__(self, rate_per_s: float, time_fn: Callable[[], float], sleep_fn: Callable[[float], None]):
        self.rate = rate_per_s
        self.time_fn = time_fn
        self.sleep_fn = sleep_fn
        self._next_at: dict[Provider, float] = {}

    def acquire(self, provider: Provider) -> None:
        if self.rate <= 0:
            return
        now = self.time_fn()
        next_at = self._next_at.get(provider, now)
        if next_at > now:
            self.sleep_fn(next_at - now)
            now = next_at
        self._next_at[provider] = now + 1.0 / self.rate


class Gateway:
    """Executes request templates according to the configured mode.

    ``network_calls`` counts actual sends; warm-cache and replay paths
    must leave it untouched, which the test suite asserts.
    """

    def __init__(
        self,
        mode: str = "replay-only",
        fixtures: FixtureStore | None = None,
        env: Mapping[str, str] | None = None,
        timeout_s: float = DEFAULT_TIMEOUT_S,
        retries: int = DEFAULT_RETRIES,
        rate_limit_per_s: float = DEFAULT_RATE_PER_S,
        time_fn: Callable[[], float] = time.monotonic,
        sleep_fn: Callable[[float], None] = time.sleep,
    ):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        if mode in ("record", "replay-only") and fixtures is None:
            raise ValueError(f"{mode} mode requires a fixture store")
        self.mode = mode
        self.fixtures = fixtures
        self._env = env
        self.timeout_s = timeout_s
        self.retries = retries
        self._bucket = _TokenBucket(rate_limit_per_s, time_fn, sleep_fn)
        self._sleep = sleep_fn
        self.network_calls = 0
        self.executions = 0

    @property
    def env(self) -> Mapping[str, str]:
        if self._env is not None:
            return self._env
        import os

        return os.environ

    def execute(
        self,
        template: RequestTemplate,
        *,
        provider: Provider,
        tool: Tool,
        unified_query: UnifiedQuery,
    ) -> RawExchange:
        self.executions += 1
        key = canonical_key(template, provider, tool)
        if self.mode == "replay-only":
            fixture = self.fixtures.load(key)
            if fixture is None:
                raise ReplayMiss(key)
            return fixture.exchange
        resolved = inject_credentials(template, self.env)
        self._bucket.acquire(provider)
        status, body, latency_ms = self._send(resolved)
        if status >= 400:
            raise ProviderError(status, body)
        exchange = RawExchange(
            request_template=template,
            status=status,
            raw_response=body,
            latency_ms=latency_ms,
            fetched_at=truncate_to_second(datetime.now(timezone.utc)),
        )
        if self.mode == "record":
            self.fixtures.save(key, Fixture(provider, tool, unified_query, exchange))
        return exchange

    def _send(self, resolved: ResolvedRequest) -> tuple[int, bytes, int]:
        import requests

        last_exc: Exception | None = None
        for attempt in range(self.retries + 1):
            if attempt:
                self._sleep(0.5 * 2 ** (attempt - 1))
            started = time.monotonic()
            try:
                self.network_calls += 1
                response = requests.request(
                    resolved.method,
                    resolved.url,
                    params=resolved.query_params,
                    json=resolved.body,
                    timeout=self.timeout_s,
                )
            except (requests.ConnectionError, requests.Timeout) as exc:
                last_exc = exc
                continue
            latency_ms = int((time.monotonic() - started) * 1000)
            return response.status_code, response.content, latency_ms
        raise ProviderUnavailable(f"transport failed after {self.retries + 1} attempts: {last_exc}")
