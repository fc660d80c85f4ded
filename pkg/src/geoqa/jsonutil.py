"""Canonical JSON helpers.

Every persisted or compared JSON artifact in the toolkit goes through
``canonical_dumps``: sorted keys, compact separators, UTF-8 text. This
is what makes renders, cache keys, and exports byte-stable across runs
and platforms.
"""

from __future__ import annotations

import json
from typing import Any


def canonical_dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def canonical_bytes(obj: Any) -> bytes:
    return canonical_dumps(obj).encode("utf-8")
