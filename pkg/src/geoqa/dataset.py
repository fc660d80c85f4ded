"""Bit-exact JSON export/import of complete datasets.

A dataset document freezes everything an evaluation needs: the contexts
(raw bytes base64-encoded for fidelity, plus the formatted rendering
exactly as the annotator saw it), the QA pairs, and per-entry
provenance down to the cache key. Export is canonical (sorted keys,
UTF-8, newline-terminated), so equal documents are equal bytes.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources

import jsonschema

from .adapters.base import RequestTemplate, UnifiedQuery, validate_normalized
from .cache import normalized_from_json, normalized_to_json
from .context import (
    FORMATTED_TEMPLATE_VERSION,
    Context,
    ContextEntry,
    render_formatted,
)
from .errors import DanglingReference, GeoQAError, SchemaViolation, UnsupportedVersion
from .exchange import RawExchange
from .jsonutil import canonical_dumps
from .model import Provider, Tool, validate_place, validate_route
from .qa import (
    PROMPT_TEMPLATE_VERSION,
    AnswerFormat,
    QADraft,
    QAPair,
    _validate_gold,
    find_place_references,
)
from .serialize import format_timestamp, parse_timestamp

SCHEMA_VERSION = 1

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


def default_template_versions() -> dict[str, str]:
    return {"formatted": FORMATTED_TEMPLATE_VERSION, "prompt": PROMPT_TEMPLATE_VERSION}


@dataclass(frozen=True)
class DatasetDocument:
    contexts: tuple[Context, ...] = ()
    qa_pairs: tuple[QAPair, ...] = ()
    schema_version: int = SCHEMA_VERSION
    created_at: datetime = _EPOCH
    template_versions: dict[str, str] = field(default_factory=default_template_versions)


def build_dataset(contexts, qa_pairs) -> DatasetDocument:
    """Assemble a document with a deterministic creation timestamp: the
    newest exchange in the data, or the epoch for empty datasets. Wall
    clocks would break byte-identical replay runs."""
    contexts = tuple(contexts)
    stamps = [e.fetched_at for c in contexts for e in c.entries]
    return DatasetDocument(
        contexts=contexts,
        qa_pairs=tuple(qa_pairs),
        created_at=max(stamps) if stamps else _EPOCH,
    )


def _entry_doc(entry: ContextEntry) -> dict:
    return {
        "sequence_no": entry.sequence_no,
        "tool": entry.tool.value,
        "provider": entry.provider.value,
        "query": entry.unified_query.parameters,
        "request": entry.exchange.request_template.to_json(),
        "status": entry.exchange.status,
        "latency_ms": entry.exchange.latency_ms,
        "fetched_at": format_timestamp(entry.fetched_at),
        "cache_key": entry.cache_key,
        "raw_response_base64": base64.b64encode(entry.exchange.raw_response).decode("ascii"),
        "normalized": normalized_to_json(entry.normalized),
    }


def _entry_from_doc(doc: dict, tool: Tool) -> ContextEntry:
    fetched = parse_timestamp(doc["fetched_at"])
    return ContextEntry(
        sequence_no=doc["sequence_no"],
        tool=tool,
        provider=Provider(doc["provider"]),
        unified_query=UnifiedQuery(tool=tool, parameters=dict(doc["query"])),
        exchange=RawExchange(
            request_template=RequestTemplate.from_json(doc["request"]),
            status=doc["status"],
            raw_response=base64.b64decode(doc["raw_response_base64"]),
            latency_ms=doc["latency_ms"],
            fetched_at=fetched,
        ),
        normalized=normalized_from_json(doc["normalized"]),
        cache_key=doc["cache_key"],
        fetched_at=fetched,
    )


def _qa_doc(pair: QAPair) -> dict:
    gold = list(pair.gold) if isinstance(pair.gold, tuple) else pair.gold
    return {
        "id": pair.id,
        "context_id": pair.context_id,
        "question": pair.question,
        "format": pair.format.value,
        "options": list(pair.options),
        "gold": gold,
        "categories": list(pair.categories),
    }


def _qa_from_doc(doc: dict) -> QAPair:
    gold = doc["gold"]
    if isinstance(gold, list):
        gold = tuple(gold)
    return QAPair(
        id=doc["id"],
        context_id=doc["context_id"],
        question=doc["question"],
        format=AnswerFormat(doc["format"]),
        gold=gold,
        options=tuple(doc["options"]),
        categories=tuple(doc["categories"]),
    )


def export_json(dataset: DatasetDocument) -> bytes:
    """Serialize canonically. The formatted rendering is frozen into the
    file at export time so downstream evaluation sees exactly what the
    annotator saw."""
    context_ids = {c.id for c in dataset.contexts}
    for pair in dataset.qa_pairs:
        if pair.context_id not in context_ids:
            raise DanglingReference(f"qa {pair.id} references missing context {pair.context_id}")
    doc = {
        "schema_version": dataset.schema_version,
        "created_at": format_timestamp(dataset.created_at),
        "template_versions": dataset.template_versions,
        "contexts": [
            {
                "id": c.id,
                "title": c.title,
                "formatted": render_formatted(c),
                "entries": [_entry_doc(e) for e in c.entries],
            }
            for c in dataset.contexts
        ],
        "qa_pairs": [_qa_doc(p) for p in dataset.qa_pairs],
    }
    return (canonical_dumps(doc) + "\n").encode("utf-8")


def _load_schema() -> dict:
    text = resources.files("geoqa").joinpath("schemas/dataset.schema.json").read_text("utf-8")
    return json.loads(text)


def _pointer(parts) -> str:
    return "/" + "/".join(str(p) for p in parts) if parts else ""


def import_json(data: bytes) -> DatasetDocument:
    """Parse, version-check, schema-validate, then construct.

    Referential problems surface as :class:`SchemaViolation` with a
    JSON-pointer path; documents from a future schema_version raise
    :class:`UnsupportedVersion` instead of being guessed at.
    """
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaViolation("", f"not a valid JSON document: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaViolation("", "top level must be an object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise UnsupportedVersion(version)
    validator = jsonschema.Draft202012Validator(_load_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        first = errors[0]
        raise SchemaViolation(_pointer(first.absolute_path), first.message)

    context_ids = {c["id"] for c in doc["contexts"]}
    for i, qa in enumerate(doc["qa_pairs"]):
        if qa["context_id"] not in context_ids:
            raise SchemaViolation(
                f"/qa_pairs/{i}/context_id", f"unknown context {qa['context_id']!r}"
            )

    contexts = []
    for c in doc["contexts"]:
        entries = tuple(_entry_from_doc(e, Tool(e["tool"])) for e in c["entries"])
        contexts.append(Context(id=c["id"], title=c["title"], entries=entries))
    return DatasetDocument(
        contexts=tuple(contexts),
        qa_pairs=tuple(_qa_from_doc(q) for q in doc["qa_pairs"]),
        schema_version=version,
        created_at=parse_timestamp(doc["created_at"]),
        template_versions=dict(doc["template_versions"]),
    )


def validate_dataset(dataset: DatasetDocument) -> list[str]:
    """Aggregate every module-level invariant check; total function.

    Reports place validity, route validity (including the TRANSIT
    exclusion), normalized-payload discipline, entry provenance
    (cache keys, dense sequence numbers), QA gold typing, and '@'
    resolution.
    """
    violations: list[str] = []
    by_id: dict[str, Context] = {}
    for c, ctx in enumerate(dataset.contexts):
        root = f"/contexts/{c}"
        if ctx.id in by_id:
            violations.append(f"{root}/id: duplicate context id {ctx.id!r}")
        by_id[ctx.id] = ctx
        for e, entry in enumerate(ctx.entries):
            eroot = f"{root}/entries/{e}"
            if entry.sequence_no != e + 1:
                violations.append(
                    f"{eroot}/sequence_no: expected {e + 1}, got {entry.sequence_no}"
                )
            if not entry.cache_key:
                violations.append(f"{eroot}/cache_key: missing")
            for message in validate_normalized(entry.normalized):
                violations.append(f"{eroot}/normalized: {message}")
            for p, place in enumerate(entry.normalized.places):
                for message in validate_place(place):
                    violations.append(f"{eroot}/normalized/places/{p}: {message}")
            for r, route in enumerate(entry.normalized.routes):
                for message in validate_route(route):
                    violations.append(f"{eroot}/normalized/routes/{r}: {message}")

    seen_qa: set[str] = set()
    for i, pair in enumerate(dataset.qa_pairs):
        root = f"/qa_pairs/{i}"
        if pair.id in seen_qa:
            violations.append(f"{root}/id: duplicate qa id {pair.id!r}")
        seen_qa.add(pair.id)
        ctx = by_id.get(pair.context_id)
        if ctx is None:
            violations.append(f"{root}/context_id: unknown context {pair.context_id!r}")
            continue
        draft = QADraft(
            question=pair.question,
            format=pair.format,
            gold=pair.gold,
            options=pair.options,
            categories=pair.categories,
        )
        try:
            _validate_gold(draft)
        except GeoQAError as exc:
            violations.append(f"{root}/gold: {exc}")
        known = list(ctx.place_index)
        _, unresolved = find_place_references(pair.question, known)
        for name in unresolved:
            violations.append(f"{root}/question: unresolved place {name!r}")
        if pair.format is AnswerFormat.OPEN_ENDED:
            _, unresolved = find_place_references(str(pair.gold), known)
            for name in unresolved:
                violations.append(f"{root}/gold: unresolved place {name!r}")
    return violations
