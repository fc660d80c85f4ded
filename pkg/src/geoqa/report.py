"""Dataset reports: delimited stats plus rendered map figures.

Given an exported dataset, writes ``context_stats.csv`` (one row per
context), a reduction bar chart, and one map figure per context showing
place markers and decoded route paths. Figures are rendered headlessly
to files; nothing here needs a display.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .context import Context, context_stats
from .dataset import DatasetDocument
from .polyline import decode_polyline


def context_rows(dataset: DatasetDocument) -> list[dict]:
    rows = []
    for ctx in dataset.contexts:
        stats = context_stats(ctx) if ctx.entries else None
        places = {
            (p.provider.value, p.id)
            for e in ctx.entries
            for p in e.normalized.places
        }
        rows.append(
            {
                "context_id": ctx.id,
                "title": ctx.title,
                "entries": len(ctx.entries),
                "places": len(places),
                "structured_chars": stats.structured_chars if stats else 0,
                "formatted_chars": stats.formatted_chars if stats else 0,
                "reduction_pct": f"{stats.reduction_pct:.2f}" if stats else "",
            }
        )
    return rows


def write_stats_csv(dataset: DatasetDocument, path: Path) -> Path:
    rows = context_rows(dataset)
    fieldnames = [
        "context_id",
        "title",
        "entries",
        "places",
        "structured_chars",
        "formatted_chars",
        "reduction_pct",
    ]
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
    return path


def plot_reduction(dataset: DatasetDocument, path: Path) -> Path | None:
    rows = [r for r in context_rows(dataset) if r["reduction_pct"]]
    if not rows:
        return None
    labels = [r["context_id"] for r in rows]
    values = [float(r["reduction_pct"]) for r in rows]
    fig, ax = plt.subplots(figsize=(max(6, 0.4 * len(rows)), 4))
    ax.bar(range(len(values)), values, color="#4878a8")
    mean = sum(values) / len(values)
    ax.axhline(mean, color="#a84848", linestyle="--", linewidth=1, label=f"mean {mean:.1f}%")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=90, fontsize=7)
    ax.set_ylabel("context size reduction (%)")
    ax.set_ylim(0, 100)
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_context_map(ctx: Context, path: Path) -> Path | None:
    """Markers for every place, lines for every decoded route path."""
    lons, lats = [], []
    seen = set()
    for entry in ctx.entries:
        for place in entry.normalized.places:
            key = (place.provider.value, place.id)
            if key in seen:
                continue
            seen.add(key)
            lons.append(place.location.longitude)
            lats.append(place.location.latitude)
    paths = []
    for entry in ctx.entries:
        for route in entry.normalized.routes:
            points = decode_polyline(route.encoded_polyline)
            if points:
                paths.append(points)
    if not lons and not paths:
        return None
    fig, ax = plt.subplots(figsize=(6, 6))
    for points in paths:
        ax.plot(
            [p.longitude for p in points],
            [p.latitude for p in points],
            linewidth=1.5,
            alpha=0.8,
        )
    if lons:
        ax.scatter(lons, lats, s=24, color="#a84848", zorder=3)
    ax.set_xlabel("longitude")
    ax.set_ylabel("latitude")
    ax.set_title(f"{ctx.id}: {ctx.title}", fontsize=10)
    ax.set_aspect("equal", adjustable="datalim")
    ax.grid(True, linewidth=0.3, alpha=0.5)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def write_report(dataset: DatasetDocument, out_dir: str | Path) -> dict:
    """Render the full report; returns the written file paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {"csv": str(write_stats_csv(dataset, out / "context_stats.csv")), "figures": []}
    chart = plot_reduction(dataset, out / "reduction.png")
    if chart:
        written["figures"].append(str(chart))
    for ctx in dataset.contexts:
        figure = plot_context_map(ctx, out / f"map_{ctx.id}.png")
        if figure:
            written["figures"].append(str(figure))
    return written
