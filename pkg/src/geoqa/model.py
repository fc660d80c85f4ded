"""Normalized domain types shared by every provider, plus geodesic helpers.

All types are immutable values: safe to share between threads and to use
as snapshot members of append-only collections. ``LatLng`` validates at
construction; record types (``Place``, ``RouteResult``) are deliberately
lenient so imported data can be checked by the ``validate_*`` reporters
instead of failing on construction.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

EARTH_RADIUS_M = 6_371_000.0


class Provider(str, enum.Enum):
    """Registered map-service providers. ``REPLAY`` serves recorded data."""

    GOOGLE = "google"
    OPENSTREETMAP = "openstreetmap"
    MAPBOX = "mapbox"
    TOMTOM = "tomtom"
    HERE = "here"
    AZURE = "azure"
    REPLAY = "replay"


class Tool(str, enum.Enum):
    """The five data-collection tools. Exactly these kinds exist."""

    TEXT_SEARCH = "text-search"
    PLACE_DETAILS = "place-details"
    NEARBY_SEARCH = "nearby-search"
    COMPUTE_ROUTES = "compute-routes"
    SEARCH_ALONG_ROUTE = "search-along-route"


ROUTE_TOOLS = frozenset({Tool.COMPUTE_ROUTES, Tool.SEARCH_ALONG_ROUTE})

# Allowed travel modes. TRANSIT is deliberately not a member: schedule
# variability breaks response determinism, so it is rejected wherever a
# travel mode enters the system.
TRAVEL_MODES = ("DRIVE", "WALK", "BICYCLE", "TWO_WHEELER")
EXCLUDED_TRAVEL_MODE = "TRANSIT"

TRAFFIC_UNAWARE = "TRAFFIC_UNAWARE"


@dataclass(frozen=True, order=True)
class LatLng:
    """A WGS84 coordinate in decimal degrees. Validated at construction."""

    latitude: float
    longitude: float

    def __post_init__(self) -> None:
        if not (-90.0 <= self.latitude <= 90.0):
            raise ValueError(f"latitude out of [-90, 90]: {self.latitude}")
        if not (-180.0 <= self.longitude <= 180.0):
            raise ValueError(f"longitude out of [-180, 180]: {self.longitude}")


@dataclass(frozen=True)
class Place:
    """Point-of-interest record in the unified schema.

    ``id`` is provider-scoped and opaque; cross-provider identity is not
    attempted. Optional attributes stay ``None`` when a provider lacks
    them. Invariants are reported by :func:`validate_place`, not raised.
    """

    id: str
    display_name: str
    short_address: str
    location: LatLng
    provider: Provider
    rating: float | None = None
    price_level: int | None = None
    opening_hours: tuple[str, ...] | None = None
    reviews: tuple[str, ...] | None = None
    accessibility: tuple[str, ...] | None = None


@dataclass(frozen=True)
class RouteStep:
    instruction: str
    distance_meters: int


@dataclass(frozen=True)
class RouteResult:
    """One navigation path between an origin and a destination.

    ``origin``/``destination`` are either a coordinate or a provider
    place id. ``travel_mode`` should be one of :data:`TRAVEL_MODES`;
    out-of-band values (notably TRANSIT) are reported by
    :func:`validate_route`.
    """

    origin: LatLng | str
    destination: LatLng | str
    travel_mode: str
    distance_meters: int
    duration_seconds: int
    encoded_polyline: str
    provider: Provider
    intermediates: tuple[str, ...] = ()
    steps: tuple[RouteStep, ...] = field(default=())


def haversine_distance(a: LatLng, b: LatLng) -> float:
    """Great-circle distance in meters on the mean-radius sphere.

    Symmetric, zero iff ``a == b``. Spherical rather than ellipsoidal:
    nearby ranking only needs ordinal correctness.
    """
    phi1 = math.radians(a.latitude)
    phi2 = math.radians(b.latitude)
    dphi = math.radians(b.latitude - a.latitude)
    dlam = math.radians(b.longitude - a.longitude)
    h = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def validate_place(p: Place) -> list[str]:
    """Report every violated ``Place`` invariant. Empty list means ok."""
    violations = []
    if not p.id:
        violations.append("id empty")
    if not p.display_name:
        violations.append("display_name empty")
    if p.rating is not None and not (0.0 <= p.rating <= 5.0):
        violations.append(f"rating out of [0,5]: {p.rating}")
    if p.price_level is not None and not (0 <= p.price_level <= 4):
        violations.append(f"price_level out of [0,4]: {p.price_level}")
    return violations


def validate_route(r: RouteResult) -> list[str]:
    """Report every violated ``RouteResult`` invariant."""
    violations = []
    if r.travel_mode == EXCLUDED_TRAVEL_MODE:
        violations.append("travel_mode TRANSIT is excluded")
    elif r.travel_mode not in TRAVEL_MODES:
        violations.append(f"unknown travel_mode: {r.travel_mode}")
    if r.distance_meters < 0:
        violations.append(f"negative distance_meters: {r.distance_meters}")
    if r.duration_seconds < 0:
        violations.append(f"negative duration_seconds: {r.duration_seconds}")
    for i, step in enumerate(r.steps):
        if step.distance_meters > r.distance_meters:
            violations.append(
                f"step {i} distance {step.distance_meters} exceeds total {r.distance_meters}"
            )
    try:
        from . import polyline

        polyline.decode_polyline(r.encoded_polyline)
    except Exception:
        violations.append("encoded_polyline does not decode")
    return violations
