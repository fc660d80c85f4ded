"""HTTP/JSON service exposing the full workflow.

Every endpoint delegates to the workbench; in replay-only mode all
responses are deterministic. Route responses include server-decoded
polyline points so clients never need a codec. Credentials exist only
inside the gateway: no response field ever carries a resolved secret.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import __version__
from .adapters import default_registry
from .cache import ResponseCache
from .context import context_stats, entry_to_json, render_formatted, render_structured
from .dataset import export_json, import_json
from .errors import (
    CorruptEntry,
    GeoQAError,
    ProviderError,
    ProviderUnavailable,
    ReplayMiss,
    StorageUnavailable,
)
from .exchange import FixtureStore
from .gateway import DEFAULT_RATE_PER_S, DEFAULT_RETRIES, DEFAULT_TIMEOUT_S, Gateway
from .jsonutil import canonical_dumps
from .model import Provider, Tool
from .polyline import decode_polyline
from .qa import AnswerFormat, QADraft, QAPair
from .workbench import Session, Workbench

MAX_ROUTE_POINTS = 10_000


@dataclass
class AppConfig:
    """Service configuration; see README for the config-file schema."""

    mode: str = "replay-only"
    fixtures_dir: str | None = None
    cache_path: str = "geoqa-cache.sqlite"
    cors_origins: list[str] = field(default_factory=list)
    timeout_s: float = DEFAULT_TIMEOUT_S
    retries: int = DEFAULT_RETRIES
    rate_limit_per_s: float = DEFAULT_RATE_PER_S
    ui_dist: str | None = None

    @classmethod
    def from_file(cls, path: str | Path) -> "AppConfig":
        import json

        doc = json.loads(Path(path).read_text("utf-8"))
        return cls(**doc)


def build_workbench(config: AppConfig, env: dict[str, str] | None = None) -> Workbench:
    fixtures = FixtureStore(config.fixtures_dir) if config.fixtures_dir else None
    gateway = Gateway(
        mode=config.mode,
        fixtures=fixtures,
        env=env,
        timeout_s=config.timeout_s,
        retries=config.retries,
        rate_limit_per_s=config.rate_limit_per_s,
    )
    cache = ResponseCache(config.cache_path)
    return Workbench(default_registry(), cache, gateway)


class ToolRequest(BaseModel):
    provider: str
    context_id: str | None = None
    parameters: dict[str, Any] = {}


class ContextCreate(BaseModel):
    title: str = ""


class QACreate(BaseModel):
    context_id: str
    question: str
    format: str
    gold: Any
    options: list[str] = []
    categories: list[str] = []


class QAGenerate(BaseModel):
    context_id: str


class PromptRequest(BaseModel):
    rendering: str = "formatted"


class CompareRequest(BaseModel):
    response: str


class ExportRequest(BaseModel):
    context_ids: list[str] | None = None


_STATUS_BY_ERROR = [
    (ReplayMiss, 409),
    ((ProviderUnavailable, ProviderError), 502),
    ((StorageUnavailable, CorruptEntry), 500),
]


def _error_status(exc: GeoQAError) -> int:
    for types, status in _STATUS_BY_ERROR:
        if isinstance(exc, types):
            return status
    return 400


def _downsample(points: list) -> list:
    if len(points) <= MAX_ROUTE_POINTS:
        return points
    stride = math.ceil(len(points) / MAX_ROUTE_POINTS)
    sampled = points[::stride]
    if sampled[-1] != points[-1]:
        sampled.append(points[-1])
    return sampled


def _decoded_routes(run_entry, precision: int) -> list[list[dict]]:
    decoded = []
    for route in run_entry.normalized.routes:
        points = decode_polyline(route.encoded_polyline, precision)
        decoded.append(
            [
                {"latitude": p.latitude, "longitude": p.longitude}
                for p in _downsample(points)
            ]
        )
    return decoded


def _qa_doc(pair: QAPair) -> dict:
    return {
        "id": pair.id,
        "context_id": pair.context_id,
        "question": pair.question,
        "format": pair.format.value,
        "options": list(pair.options),
        "gold": list(pair.gold) if isinstance(pair.gold, tuple) else pair.gold,
        "categories": list(pair.categories),
    }


def create_app(
    config: AppConfig | None = None,
    bench: Workbench | None = None,
    env: dict[str, str] | None = None,
) -> FastAPI:
    config = config or AppConfig()
    bench = bench or build_workbench(config, env)
    app = FastAPI(title="geoqa annotator service", version=__version__)
    app.state.bench = bench
    app.state.config = config
    app.state.session = Session(id="default", mode=config.mode)

    if config.cors_origins:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=config.cors_origins,
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(GeoQAError)
    async def _geoqa_error(request: Request, exc: GeoQAError):
        return JSONResponse(
            status_code=_error_status(exc),
            content={"code": exc.code, "message": str(exc)},
        )

    @app.exception_handler(KeyError)
    async def _not_found(request: Request, exc: KeyError):
        return JSONResponse(
            status_code=404,
            content={"code": "NotFound", "message": f"unknown id: {exc.args[0]!r}"},
        )

    @app.get("/api/health")
    def health():
        return {"status": "ok", "mode": config.mode, "version": __version__}

    @app.get("/api/providers")
    def providers():
        return {
            "pairs": [
                {"provider": p.value, "tool": t.value} for p, t in bench.registry.pairs()
            ]
        }

    @app.post("/api/context")
    def create_context(body: ContextCreate):
        ctx = bench.create_context(body.title)
        app.state.session.active_context_id = ctx.id
        return {"id": ctx.id, "title": ctx.title, "entries": 0}

    @app.get("/api/context/{context_id}")
    def get_context(context_id: str, rendering: str = "formatted"):
        ctx = bench.get_context(context_id)
        if rendering not in ("structured", "formatted"):
            return JSONResponse(
                status_code=400,
                content={"code": "BadRendering", "message": f"unknown rendering {rendering!r}"},
            )
        text = render_structured(ctx) if rendering == "structured" else render_formatted(ctx)
        stats = None
        if ctx.entries:
            s = context_stats(ctx)
            stats = {
                "structured_chars": s.structured_chars,
                "formatted_chars": s.formatted_chars,
                "reduction_pct": s.reduction_pct,
            }
        return {
            "id": ctx.id,
            "title": ctx.title,
            "rendering": rendering,
            "text": text,
            "entries": len(ctx.entries),
            "stats": stats,
        }

    @app.get("/api/context/{context_id}/suggest")
    def suggest(context_id: str, prefix: str = ""):
        return {"suggestions": bench.suggest(context_id, prefix)}

    @app.post("/api/tools/{tool_name}")
    def run_tool(tool_name: str, body: ToolRequest):
        tool = Tool(tool_name)
        provider = Provider(body.provider)
        context_id = body.context_id or app.state.session.active_context_id
        if context_id is None:
            ctx = bench.create_context()
            context_id = ctx.id
            app.state.session.active_context_id = context_id
        run = bench.run_tool(provider, tool, body.parameters, context_id)
        app.state.session.dirty = True
        adapter = bench.registry.lookup(provider, tool)
        precision = adapter.descriptor.polyline_precision or 5
        return {
            "context_id": run.context.id,
            "from_cache": run.from_cache,
            "entry": entry_to_json(run.entry),
            "decoded_routes": _decoded_routes(run.entry, precision),
        }

    @app.post("/api/qa")
    def create_qa_pair(body: QACreate):
        gold = tuple(body.gold) if isinstance(body.gold, list) else body.gold
        draft = QADraft(
            question=body.question,
            format=AnswerFormat(body.format),
            gold=gold,
            options=tuple(body.options),
            categories=tuple(body.categories),
        )
        return _qa_doc(bench.add_qa(body.context_id, draft))

    @app.post("/api/qa/generate")
    def generate_qa(body: QAGenerate):
        draft = bench.generate_qa(body.context_id)
        return {
            "question": draft.question,
            "format": draft.format.value,
            "gold": draft.gold,
            "options": list(draft.options),
            "categories": list(draft.categories),
        }

    @app.get("/api/qa/{qa_id}")
    def get_qa(qa_id: str):
        return _qa_doc(bench.get_qa(qa_id))

    @app.post("/api/qa/{qa_id}/prompt")
    def qa_prompt(qa_id: str, body: PromptRequest):
        bundle = bench.prompt_for(qa_id, body.rendering)
        return {
            "qa_ref": bundle.qa_ref,
            "context_rendering": bundle.context_rendering,
            "prompt_text": bundle.prompt_text,
        }

    @app.post("/api/qa/{qa_id}/compare")
    def qa_compare(qa_id: str, body: CompareRequest):
        return {"qa_ref": qa_id, "verdict": bench.compare(qa_id, body.response)}

    @app.post("/api/dataset/export")
    def dataset_export(body: ExportRequest):
        data = export_json(bench.export_dataset(body.context_ids))
        return Response(content=data, media_type="application/json")

    @app.post("/api/dataset/import")
    async def dataset_import(request: Request):
        data = await request.body()
        contexts, pairs = bench.import_dataset(import_json(data))
        return {"contexts": contexts, "qa_pairs": pairs}

    @app.get("/api/cache/stats")
    def cache_stats():
        return bench.cache.stats()

    if config.ui_dist and Path(config.ui_dist).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.ui_dist, html=True), name="ui")

    return app


def openapi_json(app: FastAPI) -> str:
    return canonical_dumps(app.openapi())
