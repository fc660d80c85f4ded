"""Command-line interface: the whole workflow, no UI required.

Exit codes: 0 success, 1 validation failure, 2 provider or transport
failure. ``--json`` switches any command to machine-readable output.
Mutating commands persist through ``--workspace`` (a dataset JSON file
used as the working store).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .adapters import default_registry
from .cache import ResponseCache
from .context import (
    context_stats,
    format_entry_block,
    render_formatted,
    render_structured,
)
from .dataset import export_json, import_json, validate_dataset
from .errors import GeoQAError, ProviderError, ProviderUnavailable, ReplayMiss
from .exchange import FixtureStore
from .gateway import Gateway
from .jsonutil import canonical_dumps
from .model import Provider, Tool
from .qa import AnswerFormat, QADraft
from .service import AppConfig, create_app
from .workbench import Scenario, Workbench, run_scenario

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PROVIDER = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geoqa",
        description="Author reproducible geospatial QA datasets over map-service APIs.",
    )
    parser.add_argument("--config", help="JSON config file (see README)")
    parser.add_argument(
        "--mode",
        choices=["live", "record", "replay-only"],
        help="gateway mode (default replay-only)",
    )
    parser.add_argument("--fixtures", help="directory of recorded exchange fixtures")
    parser.add_argument("--cache", help="path of the response-cache SQLite file")
    parser.add_argument("--workspace", help="dataset JSON file used as persistent working store")
    parser.add_argument("--json", action="store_true", help="machine-readable output")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--with-ui", metavar="DIR", help="serve built UI assets from DIR")
    p.add_argument("--cors-origin", action="append", default=[], help="allowed UI origin")

    p = sub.add_parser("context", help="manage contexts in the workspace")
    ctx_sub = p.add_subparsers(dest="context_command", required=True)
    q = ctx_sub.add_parser("new")
    q.add_argument("--title", default="")
    q = ctx_sub.add_parser("list")
    q = ctx_sub.add_parser("show")
    q.add_argument("--context", required=True)
    q.add_argument("--rendering", choices=["formatted", "structured"], default="formatted")
    q.add_argument("--stats", action="store_true")

    for name, help_text in [
        ("search", "free-text place search"),
        ("details", "full details of a place"),
        ("nearby", "points of interest around an anchor"),
        ("route", "navigation routes between points"),
        ("salr", "places along a route"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--provider", required=True)
        p.add_argument("--context", help="append to this workspace context")
        if name == "search":
            p.add_argument("--query", required=True)
            p.add_argument("--limit", type=int)
        elif name == "details":
            p.add_argument("--place-id", required=True)
        elif name == "nearby":
            p.add_argument("--around", required=True, help='"lat,lng" or a context place id')
            p.add_argument("--category", default="restaurant")
            p.add_argument("--limit", type=int, default=20)
            p.add_argument("--radius", type=int)
            p.add_argument("--ranking", choices=["distance", "relevance"], default="distance")
        elif name == "route":
            p.add_argument("--origin", dest="origin", required=True, help='"lat,lng" or place id')
            p.add_argument("--destination", dest="destination", required=True)
            p.add_argument("--travel-mode", default="DRIVE")
            p.add_argument("--alternatives", action="store_true")
        elif name == "salr":
            p.add_argument("--query", required=True)
            p.add_argument("--limit", type=int, default=20)
            p.add_argument(
                "--route-polyline",
                help="encoded route; defaults to the context's last computed route",
            )

    p = sub.add_parser("qa", help="author and evaluate QA pairs")
    qa_sub = p.add_subparsers(dest="qa_command", required=True)
    q = qa_sub.add_parser("add")
    q.add_argument("--context", required=True)
    q.add_argument("--question", required=True)
    q.add_argument("--format", required=True, choices=[f.value for f in AnswerFormat])
    q.add_argument("--gold", required=True, help="Yes/No, option index(es) like 0 or 0,2, or text")
    q.add_argument("--option", action="append", default=[])
    q.add_argument("--category", action="append", default=[])
    q = qa_sub.add_parser("generate")
    q.add_argument("--context", required=True)
    q = qa_sub.add_parser("prompt")
    q.add_argument("--qa-id", required=True)
    q.add_argument("--rendering", choices=["formatted", "structured"], default="formatted")
    q = qa_sub.add_parser("compare")
    q.add_argument("--qa-id", required=True)
    q.add_argument("--response", required=True)

    p = sub.add_parser("suggest", help="place-name suggestions from a context")
    p.add_argument("--context", required=True)
    p.add_argument("--prefix", default="")

    p = sub.add_parser("run", help="run a scenario file against the workspace")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", help="also export the dataset to this file")

    p = sub.add_parser("record", help="run a scenario live and record fixtures")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", help="also export the dataset to this file")

    p = sub.add_parser("export", help="export the workspace dataset")
    p.add_argument("--out", required=True)

    p = sub.add_parser("import", help="merge a dataset file into the workspace")
    p.add_argument("file")

    p = sub.add_parser("validate", help="check a dataset file against all invariants")
    p.add_argument("file")

    p = sub.add_parser("cache", help="inspect or move the response cache")
    cache_sub = p.add_subparsers(dest="cache_command", required=True)
    cache_sub.add_parser("stats")
    cache_sub.add_parser("purge")
    q = cache_sub.add_parser("export")
    q.add_argument("dir")
    q = cache_sub.add_parser("import")
    q.add_argument("dir")

    p = sub.add_parser("report", help="render figures and stats for a dataset file")
    p.add_argument("file")
    p.add_argument("--out-dir", required=True)

    return parser


def _build_config(args) -> AppConfig:
    config = AppConfig.from_file(args.config) if args.config else AppConfig()
    if args.mode:
        config.mode = args.mode
    if args.fixtures:
        config.fixtures_dir = args.fixtures
    if args.cache:
        config.cache_path = args.cache
    return config


def _build_bench(config: AppConfig) -> Workbench:
    fixtures = FixtureStore(config.fixtures_dir) if config.fixtures_dir else None
    gateway = Gateway(
        mode=config.mode,
        fixtures=fixtures,
        timeout_s=config.timeout_s,
        retries=config.retries,
        rate_limit_per_s=config.rate_limit_per_s,
    )
    return Workbench(default_registry(), ResponseCache(config.cache_path), gateway)


def _load_workspace(bench: Workbench, path: str | None) -> None:
    if path and Path(path).exists():
        bench.import_dataset(import_json(Path(path).read_bytes()))


def _save_workspace(bench: Workbench, path: str | None) -> None:
    if path:
        Path(path).write_bytes(export_json(bench.export_dataset()))


def _emit(args, payload: dict, text: str | None = None) -> None:
    if args.json:
        print(canonical_dumps(payload))
    elif text is not None:
        print(text)


def _parse_point(value: str) -> dict:
    if "," in value:
        lat, _, lng = value.partition(",")
        try:
            return {"latitude": float(lat), "longitude": float(lng)}
        except ValueError:
            pass
    return {"place_id": value}


def _tool_context(bench: Workbench, args) -> str:
    if args.context:
        return args.context
    return bench.create_context(f"{args.command} session").id


def _run_tool_command(bench: Workbench, args) -> dict:
    provider = Provider(args.provider)
    if args.command == "search":
        tool, params = Tool.TEXT_SEARCH, {"query": args.query}
        if args.limit:
            params["limit"] = args.limit
    elif args.command == "details":
        tool, params = Tool.PLACE_DETAILS, {"place_id": args.place_id}
    elif args.command == "nearby":
        tool = Tool.NEARBY_SEARCH
        anchor = _parse_point(args.around)
        params = {"category": args.category, "limit": args.limit, "ranking": args.ranking}
        if "place_id" in anchor:
            params["anchor_place_id"] = anchor["place_id"]
        else:
            params["anchor_location"] = anchor
        if args.radius:
            params["radius_m"] = args.radius
    elif args.command == "route":
        tool = Tool.COMPUTE_ROUTES
        params = {
            "origin": _parse_point(args.origin),
            "destination": _parse_point(args.destination),
            "travel_mode": args.travel_mode,
        }
        if args.alternatives:
            params["alternatives"] = True
    else:
        tool = Tool.SEARCH_ALONG_ROUTE
        context_id = _tool_context(bench, args)
        polyline_text = args.route_polyline or bench.last_route_polyline(context_id)
        params = {"query": args.query, "limit": args.limit, "route_polyline": polyline_text}
        run = bench.run_tool(provider, tool, params, context_id)
        return {"run": run, "context_id": context_id}
    context_id = _tool_context(bench, args)
    run = bench.run_tool(provider, tool, params, context_id)
    return {"run": run, "context_id": context_id}


def _parse_gold(fmt: AnswerFormat, raw: str):
    if fmt is AnswerFormat.SINGLE_CHOICE:
        return int(raw)
    if fmt is AnswerFormat.MULTIPLE_CHOICE:
        return tuple(int(part) for part in raw.split(","))
    return raw


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ProviderUnavailable, ProviderError, ReplayMiss) as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except GeoQAError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except KeyError as exc:
        print(f"error [NotFound]: unknown id {exc.args[0]!r}", file=sys.stderr)
        return EXIT_VALIDATION


def _dispatch(args) -> int:
    config = _build_config(args)

    if args.command == "serve":
        import uvicorn

        if args.with_ui:
            config.ui_dist = args.with_ui
        if args.cors_origin:
            config.cors_origins = list(args.cors_origin)
        app = create_app(config)
        uvicorn.run(app, host=args.host, port=args.port)
        return EXIT_OK

    if args.command == "validate":
        data = Path(args.file).read_bytes()
        dataset = import_json(data)
        violations = validate_dataset(dataset)
        if args.json:
            print(canonical_dumps({"violations": violations}))
        else:
            for violation in violations:
                print(violation)
            if not violations:
                print("ok: no violations")
        return EXIT_VALIDATION if violations else EXIT_OK

    if args.command == "report":
        from .report import write_report

        dataset = import_json(Path(args.file).read_bytes())
        written = write_report(dataset, args.out_dir)
        _emit(args, written, f"wrote {written['csv']} and {len(written['figures'])} figure(s)")
        return EXIT_OK

    if args.command == "record":
        config.mode = "record"
        if not config.fixtures_dir:
            raise GeoQAError("record requires --fixtures")

    bench = _build_bench(config)
    _load_workspace(bench, args.workspace)

    if args.command == "cache":
        return _cache_command(bench, args)

    if args.command == "context":
        return _context_command(bench, args)

    if args.command in ("search", "details", "nearby", "route", "salr"):
        result = _run_tool_command(bench, args)
        run = result["run"]
        _save_workspace(bench, args.workspace)
        block = format_entry_block(run.entry, run.context)
        _emit(
            args,
            {
                "context_id": run.context.id,
                "from_cache": run.from_cache,
                "places": len(run.entry.normalized.places),
                "routes": len(run.entry.normalized.routes),
                "formatted": block,
            },
            block,
        )
        return EXIT_OK

    if args.command == "qa":
        return _qa_command(bench, args)

    if args.command == "suggest":
        names = bench.suggest(args.context, args.prefix)
        _emit(args, {"suggestions": names}, "\n".join(names))
        return EXIT_OK

    if args.command in ("run", "record"):
        scenario = Scenario.from_json(json.loads(Path(args.scenario).read_text("utf-8")))
        ctx = run_scenario(bench, scenario)
        _save_workspace(bench, args.workspace)
        if args.out:
            data = export_json(bench.export_dataset())
            Path(args.out).write_bytes(data)
        _emit(
            args,
            {"context_id": ctx.id, "entries": len(ctx.entries)},
            f"{ctx.id}: {len(ctx.entries)} entries, {len(bench.qa_pairs)} qa pairs",
        )
        return EXIT_OK

    if args.command == "export":
        data = export_json(bench.export_dataset())
        Path(args.out).write_bytes(data)
        _emit(args, {"out": args.out, "bytes": len(data)}, f"wrote {args.out} ({len(data)} bytes)")
        return EXIT_OK

    if args.command == "import":
        contexts, pairs = bench.import_dataset(import_json(Path(args.file).read_bytes()))
        _save_workspace(bench, args.workspace)
        _emit(
            args,
            {"contexts": contexts, "qa_pairs": pairs},
            f"imported {contexts} context(s), {pairs} qa pair(s)",
        )
        return EXIT_OK

    raise AssertionError(f"unhandled command {args.command}")


def _context_command(bench: Workbench, args) -> int:
    if args.context_command == "new":
        ctx = bench.create_context(args.title)
        _save_workspace(bench, args.workspace)
        _emit(args, {"id": ctx.id, "title": ctx.title}, f"{ctx.id}: {ctx.title}")
        return EXIT_OK
    if args.context_command == "list":
        rows = [
            {"id": c.id, "title": c.title, "entries": len(c.entries)}
            for _, c in sorted(bench.contexts.items())
        ]
        _emit(
            args,
            {"contexts": rows},
            "\n".join(f"{r['id']}  {r['entries']:3d} entries  {r['title']}" for r in rows),
        )
        return EXIT_OK
    ctx = bench.get_context(args.context)
    text = render_structured(ctx) if args.rendering == "structured" else render_formatted(ctx)
    if args.stats and ctx.entries:
        stats = context_stats(ctx)
        text += (
            f"\n\n[{stats.structured_chars} structured chars, "
            f"{stats.formatted_chars} formatted chars, "
            f"{stats.reduction_pct:.2f}% reduction]"
        )
    _emit(args, {"id": ctx.id, "rendering": args.rendering, "text": text}, text)
    return EXIT_OK


def _qa_command(bench: Workbench, args) -> int:
    if args.qa_command == "add":
        fmt = AnswerFormat(args.format)
        draft = QADraft(
            question=args.question,
            format=fmt,
            gold=_parse_gold(fmt, args.gold),
            options=tuple(args.option),
            categories=tuple(args.category),
        )
        pair = bench.add_qa(args.context, draft)
        _save_workspace(bench, args.workspace)
        _emit(args, {"id": pair.id, "context_id": pair.context_id}, pair.id)
        return EXIT_OK
    if args.qa_command == "generate":
        draft = bench.generate_qa(args.context)
        pair = bench.add_qa(args.context, draft)
        _save_workspace(bench, args.workspace)
        _emit(
            args,
            {"id": pair.id, "question": pair.question, "gold": pair.gold},
            f"{pair.id}: {pair.question} -> {pair.gold}",
        )
        return EXIT_OK
    if args.qa_command == "prompt":
        bundle = bench.prompt_for(args.qa_id, args.rendering)
        _emit(
            args,
            {"qa_ref": bundle.qa_ref, "prompt_text": bundle.prompt_text},
            bundle.prompt_text,
        )
        return EXIT_OK
    verdict = bench.compare(args.qa_id, args.response)
    _emit(args, {"qa_ref": args.qa_id, "verdict": verdict}, verdict)
    return EXIT_OK


def _cache_command(bench: Workbench, args) -> int:
    if args.cache_command == "stats":
        stats = bench.cache.stats()
        _emit(
            args,
            stats,
            f"hits {stats['hits']}, misses {stats['misses']}, "
            f"entries {stats['entries']}, bytes {stats['bytes']}",
        )
        return EXIT_OK
    if args.cache_command == "purge":
        count = bench.cache.purge()
        _emit(args, {"purged": count}, f"purged {count} entries")
        return EXIT_OK
    if args.cache_command == "export":
        count = bench.cache.export_fixtures(FixtureStore(args.dir))
        _emit(args, {"exported": count}, f"exported {count} fixture(s) to {args.dir}")
        return EXIT_OK
    count = bench.cache.import_fixtures(FixtureStore(args.dir), bench.registry)
    _emit(args, {"imported": count}, f"imported {count} fixture(s) from {args.dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
