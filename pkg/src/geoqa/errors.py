"""Typed errors shared across the toolkit.

Every error carries a stable ``code`` (its class name) so the HTTP layer
can surface machine-readable error bodies without string matching.
"""

from __future__ import annotations


class GeoQAError(Exception):
    """Base class for all toolkit errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


class MalformedPolyline(GeoQAError):
    """Polyline text is not decodable (bad alphabet or truncated chunk)."""


class UnsupportedParameter(GeoQAError):
    """A unified query carries a parameter the adapter does not allow."""

    def __init__(self, name: str, detail: str = ""):
        self.name = name
        msg = f"unsupported parameter: {name}"
        if detail:
            msg = f"{msg} ({detail})"
        super().__init__(msg)


class UnsupportedPair(GeoQAError):
    """No implemented adapter exists for this (provider, tool) pair."""

    def __init__(self, provider: str, tool: str, detail: str = ""):
        self.provider = provider
        self.tool = tool
        msg = f"no adapter for ({provider}, {tool})"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)


class MalformedProviderResponse(GeoQAError):
    """Provider payload does not match its documented shape."""

    def __init__(self, path: str, detail: str = ""):
        self.path = path
        msg = f"malformed provider response at {path}"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)


class MissingCredential(GeoQAError):
    """One or more placeholder environment variables are unset."""

    def __init__(self, names: list[str] | str):
        self.names = [names] if isinstance(names, str) else list(names)
        super().__init__("missing credentials: " + ", ".join(self.names))


class ProviderUnavailable(GeoQAError):
    """Transport-level failure talking to the provider."""


class ProviderError(GeoQAError):
    """Provider answered with a 4xx/5xx status; body is preserved."""

    def __init__(self, status: int, body: bytes):
        self.status = status
        self.body = body
        super().__init__(f"provider returned HTTP {status}")


class ReplayMiss(GeoQAError):
    """Replay-only mode found no fixture for the request."""

    def __init__(self, key: str):
        self.key = key
        super().__init__(f"no recorded exchange for key {key}")


class StorageUnavailable(GeoQAError):
    """The cache store cannot be opened or written."""


class CorruptEntry(GeoQAError):
    """A cache entry failed its checksum on read."""

    def __init__(self, key: str):
        self.key = key
        super().__init__(f"checksum mismatch for cache entry {key}")


class EmptyContext(GeoQAError):
    """Stats were requested for a context with no entries."""


class InvalidGold(GeoQAError):
    """Gold answer does not match the declared answer format."""


class MissingOptions(GeoQAError):
    """Choice-format question lacks the required options."""


class UnresolvedPlace(GeoQAError):
    """An '@'-referenced place name is absent from the context."""

    def __init__(self, name: str):
        self.place_name = name
        super().__init__(f"place not in context: {name}")


class HookFailure(GeoQAError):
    """The external question-generation hook raised."""


class DanglingReference(GeoQAError):
    """Dataset export found a QA pair pointing at a missing context."""


class SchemaViolation(GeoQAError):
    """Dataset document failed schema or referential validation."""

    def __init__(self, pointer: str, detail: str):
        self.pointer = pointer
        super().__init__(f"{pointer or '/'}: {detail}")


class UnsupportedVersion(GeoQAError):
    """Dataset document declares a schema_version this build cannot read."""

    def __init__(self, version: object):
        self.version = version
        super().__init__(f"unsupported dataset schema_version: {version!r}")
