"""Bit-exact codec for polyline-encoded route geometry.

Implements the standard delta/zigzag/base64-offset scheme used by
routing APIs. Precision (5 or 6 fractional digits) is always explicit,
never inferred from the text.
"""

from __future__ import annotations

import math

from .errors import MalformedPolyline
from .model import LatLng

# Valid chunk characters are '?'..'~' (codepoint - 63 in [0, 63]).
_MIN_CHAR = 63
_MAX_CHAR = 126


def _scale(precision: int) -> float:
    if precision not in (5, 6):
        raise ValueError(f"precision must be 5 or 6, got {precision}")
    return 10.0**precision


def decode_polyline(text: str, precision: int = 5) -> list[LatLng]:
    """Decode polyline text into coordinates at the given precision.

    Empty text decodes to an empty list. Raises
    :class:`~geoqa.errors.MalformedPolyline` when a character falls
    outside the alphabet, a chunk sequence terminates mid-value, or the
    decoded values leave the valid coordinate domain.
    """
    scale = _scale(precision)
    coords: list[LatLng] = []
    index = 0
    lat = 0
    lng = 0
    n = len(text)
    while index < n:
        changes = []
        for _ in range(2):
            result = 0
            shift = 0
            while True:
                if index >= n:
                    raise MalformedPolyline(f"truncated chunk sequence at offset {index}")
                ch = ord(text[index])
                if ch < _MIN_CHAR or ch > _MAX_CHAR:
                    raise MalformedPolyline(
                        f"character {text[index]!r} at offset {index} outside polyline alphabet"
                    )
                index += 1
                b = ch - 63
                result |= (b & 0x1F) << shift
                shift += 5
                if b < 0x20:
                    break
            changes.append(~(result >> 1) if result & 1 else result >> 1)
        lat += changes[0]
        lng += changes[1]
        try:
            coords.append(LatLng(lat / scale, lng / scale))
        except ValueError as exc:
            raise MalformedPolyline(f"decoded coordinate out of range: {exc}") from exc
    return coords


def encode_polyline(points: list[LatLng] | tuple[LatLng, ...], precision: int = 5) -> str:
    """Encode coordinates as polyline text.

    Inverse of :func:`decode_polyline` up to the grid: a round trip
    reproduces each coordinate within 0.5 * 10**-precision. Scaled
    values are rounded half away from zero.
    """
    scale = _scale(precision)
    chunks: list[str] = []
    prev_lat = 0
    prev_lng = 0
    for point in points:
        lat = _round_half_away(point.latitude * scale)
        lng = _round_half_away(point.longitude * scale)
        chunks.append(_encode_value(lat - prev_lat))
        chunks.append(_encode_value(lng - prev_lng))
        prev_lat = lat
        prev_lng = lng
    return "".join(chunks)


def _round_half_away(value: float) -> int:
    return int(math.floor(abs(value) + 0.5)) * (1 if value >= 0 else -1)


def _encode_value(value: int) -> str:
    value = ~(value << 1) if value < 0 else value << 1
    out = []
    while value >= 0x20:
        out.append(chr((0x20 | (value & 0x1F)) + 63))
        value >>= 5
    out.append(chr(value + 63))
    return "".join(out)
