"""Headless orchestration of the full authoring workflow.

The workbench owns the in-memory context and QA stores and runs the
tool pipeline: adapter lookup, request conversion, cache consultation,
gateway execution, response normalization, context append. The HTTP
service and the CLI are both thin shells over this module, so every
workflow step works without a UI.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .adapters import AdapterRegistry, UnifiedQuery, normalize_route_request
from .cache import ResponseCache, canonical_key, make_entry
from .context import Context, ContextEntry, append_entry, suggest_places
from .dataset import DatasetDocument, build_dataset
from .errors import UnsupportedParameter
from .gateway import Gateway
from .model import ROUTE_TOOLS, Provider, Tool
from .qa import (
    AnswerFormat,
    GenerationHook,
    PromptBundle,
    QADraft,
    QAPair,
    build_prompt,
    compare_answer,
    create_qa,
    generate_question_draft,
)


@dataclass
class Session:
    """One annotator's working state: a single active context at a time."""

    id: str
    mode: str
    active_context_id: str | None = None
    dirty: bool = False


@dataclass
class ToolRun:
    context: Context
    entry: ContextEntry
    from_cache: bool


class Workbench:
    def __init__(self, registry: AdapterRegistry, cache: ResponseCache, gateway: Gateway):
        self.registry = registry
        self.cache = cache
        self.gateway = gateway
        self.contexts: dict[str, Context] = {}
        self.qa_pairs: dict[str, QAPair] = {}
        self._context_seq = 0

    # -- contexts ----------------------------------------------------

    def create_context(self, title: str = "") -> Context:
        self._context_seq += 1
        ctx = Context(id=f"ctx-{self._context_seq:04d}", title=title or f"Context {self._context_seq}")
        self.contexts[ctx.id] = ctx
        return ctx

    def get_context(self, context_id: str) -> Context:
        return self.contexts[context_id]

    # -- the tool pipeline -------------------------------------------

    def run_tool(
        self,
        provider: Provider,
        tool: Tool,
        parameters: dict[str, Any],
        context_id: str,
    ) -> ToolRun:
        ctx = self.get_context(context_id)
        params = dict(parameters)
        if tool is Tool.NEARBY_SEARCH:
            params = self._resolve_anchor(ctx, params)
        query = UnifiedQuery(tool=tool, parameters=params)
        if tool in ROUTE_TOOLS:
            query = normalize_route_request(query)
        adapter = self.registry.lookup(provider, tool)
        template = adapter.convert_request(query)
        key = canonical_key(template, provider, tool)
        cached = self.cache.get(key)
        if cached is None:
            exchange = self.gateway.execute(
                template, provider=provider, tool=tool, unified_query=query
            )
            cached = make_entry(adapter, query, exchange)
            self.cache.put(cached)
            from_cache = False
        else:
            from_cache = True
        ctx = append_entry(
            ctx,
            tool=tool,
            provider=provider,
            unified_query=query,
            exchange=cached.exchange,
            normalized=cached.normalized,
            cache_key=key,
        )
        self.contexts[ctx.id] = ctx
        return ToolRun(context=ctx, entry=ctx.entries[-1], from_cache=from_cache)

    def _resolve_anchor(self, ctx: Context, params: dict[str, Any]) -> dict[str, Any]:
        """Fill anchor_location from a context place when only the place
        id was given; keeps both in the query so the cache key reflects
        the full request identity."""
        anchor_id = params.get("anchor_place_id")
        if anchor_id and "anchor_location" not in params:
            place = ctx.places_by_id.get(anchor_id)
            if place is None:
                raise UnsupportedParameter(
                    "anchor_place_id", f"place {anchor_id!r} not found in context {ctx.id}"
                )
            params["anchor_location"] = {
                "latitude": place.location.latitude,
                "longitude": place.location.longitude,
            }
        return params

    def last_route_polyline(self, context_id: str) -> str:
        """Encoded polyline of the first route of the most recent
        compute-routes entry; convenience for along-route search."""
        ctx = self.get_context(context_id)
        for entry in reversed(ctx.entries):
            if entry.tool is Tool.COMPUTE_ROUTES and entry.normalized.routes:
                return entry.normalized.routes[0].encoded_polyline
        raise UnsupportedParameter("route_polyline", "no compute-routes entry in context")

    # -- qa ------------------------------------------------------------

    def add_qa(self, context_id: str, draft: QADraft) -> QAPair:
        ctx = self.get_context(context_id)
        pair = create_qa(ctx, draft)
        self.qa_pairs[pair.id] = pair
        return pair

    def generate_qa(self, context_id: str, hook: GenerationHook | None = None) -> QADraft:
        return generate_question_draft(self.get_context(context_id), hook)

    def get_qa(self, qa_id: str) -> QAPair:
        return self.qa_pairs[qa_id]

    def prompt_for(self, qa_id: str, rendering: str = "formatted") -> PromptBundle:
        pair = self.get_qa(qa_id)
        return build_prompt(self.get_context(pair.context_id), pair, rendering)

    def compare(self, qa_id: str, model_response: str) -> str:
        return compare_answer(self.get_qa(qa_id), model_response)

    def suggest(self, context_id: str, prefix: str) -> list[str]:
        return suggest_places(self.get_context(context_id), prefix)

    # -- datasets ------------------------------------------------------

    def export_dataset(self, context_ids: list[str] | None = None) -> DatasetDocument:
        if context_ids is None:
            contexts = [self.contexts[k] for k in sorted(self.contexts)]
        else:
            contexts = [self.get_context(cid) for cid in context_ids]
        wanted = {c.id for c in contexts}
        pairs = [p for _, p in sorted(self.qa_pairs.items()) if p.context_id in wanted]
        return build_dataset(contexts, pairs)

    def import_dataset(self, dataset: DatasetDocument) -> tuple[int, int]:
        for ctx in dataset.contexts:
            self.contexts[ctx.id] = ctx
            seq = _ctx_number(ctx.id)
            if seq is not None:
                self._context_seq = max(self._context_seq, seq)
        for pair in dataset.qa_pairs:
            self.qa_pairs[pair.id] = pair
        return len(dataset.contexts), len(dataset.qa_pairs)


def _ctx_number(context_id: str) -> int | None:
    if context_id.startswith("ctx-"):
        tail = context_id[4:]
        if tail.isdigit():
            return int(tail)
    return None


@dataclass
class Scenario:
    """A replayable authoring script: tool steps plus QA drafts.

    Step parameters may contain reference objects resolved against the
    context built so far:

    - ``{"$place_id": "<name>"}``: id of the named context place
    - ``{"$place_location": "<name>"}``: coordinates of the named place
    - ``{"$route_polyline": k}``: polyline of route k of the last
      compute-routes entry
    """

    title: str
    steps: list[dict] = field(default_factory=list)
    qa: list[dict] = field(default_factory=list)

    @classmethod
    def from_json(cls, doc: dict) -> "Scenario":
        return cls(
            title=doc.get("title", "Scenario"),
            steps=list(doc.get("steps", [])),
            qa=list(doc.get("qa", [])),
        )


def _resolve_value(ctx: Context, value: Any) -> Any:
    if isinstance(value, dict):
        if "$place_id" in value:
            name = value["$place_id"]
            place = ctx.place_index.get(name)
            if place is None:
                raise UnsupportedParameter("parameters", f"no place named {name!r} in context")
            return place.id
        if "$place_location" in value:
            name = value["$place_location"]
            place = ctx.place_index.get(name)
            if place is None:
                raise UnsupportedParameter("parameters", f"no place named {name!r} in context")
            return {
                "latitude": place.location.latitude,
                "longitude": place.location.longitude,
            }
        if "$route_polyline" in value:
            index = int(value["$route_polyline"])
            for entry in reversed(ctx.entries):
                if entry.tool is Tool.COMPUTE_ROUTES and entry.normalized.routes:
                    return entry.normalized.routes[index].encoded_polyline
            raise UnsupportedParameter("parameters", "no compute-routes entry in context")
        return {k: _resolve_value(ctx, v) for k, v in value.items()}
    if isinstance(value, list):
        return [_resolve_value(ctx, v) for v in value]
    return value


def run_scenario(bench: Workbench, scenario: Scenario) -> Context:
    """Execute every step and QA draft against a fresh context."""
    ctx = bench.create_context(scenario.title)
    for step in scenario.steps:
        provider = Provider(step["provider"])
        tool = Tool(step["tool"])
        params = _resolve_value(bench.get_context(ctx.id), step.get("parameters", {}))
        run = bench.run_tool(provider, tool, params, ctx.id)
        ctx = run.context
    for qa_doc in scenario.qa:
        gold = qa_doc["gold"]
        if isinstance(gold, list):
            gold = tuple(gold)
        draft = QADraft(
            question=qa_doc["question"],
            format=AnswerFormat(qa_doc["format"]),
            gold=gold,
            options=tuple(qa_doc.get("options", [])),
            categories=tuple(qa_doc.get("categories", [])),
        )
        bench.add_qa(ctx.id, draft)
    return bench.get_context(ctx.id)
