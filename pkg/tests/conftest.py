from __future__ import annotations

import json
from pathlib import Path

import pytest

from geoqa.adapters import default_registry
from geoqa.cache import ResponseCache
from geoqa.exchange import FixtureStore
from geoqa.gateway import Gateway
from geoqa.workbench import Scenario, Workbench, run_scenario


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if "test_acceptance" not in report.nodeid or report.when != "call":
        return
    name = report.nodeid.split("::")[-1].replace("test_", "", 1)
    verdict = "PASS" if report.passed else "FAIL"
    print(f"\nACCEPTANCE {verdict}: {name}", flush=True)

FIXTURES_DIR = Path(__file__).parent / "fixtures"
EXCHANGES_DIR = FIXTURES_DIR / "exchanges"
SCENARIOS_DIR = FIXTURES_DIR / "scenarios"
GOLDEN_DIR = FIXTURES_DIR / "golden"

# Sentinel credentials: tests that persist artifacts grep for these
# byte sequences to prove secrets never leak out of the gateway.
SENTINEL_ENV = {
    "GOOGLE_MAPS_API_KEY": "sentinel-google-5f3a9c",
    "TOMTOM_API_KEY": "sentinel-tomtom-8d2be1",
    "GRAPHHOPPER_API_KEY": "sentinel-graphhopper-33c7f0",
}


@pytest.fixture()
def registry():
    return default_registry()


@pytest.fixture()
def replay_bench(tmp_path, registry):
    """Workbench wired for deterministic replay over the bundled corpus."""
    gateway = Gateway(
        mode="replay-only",
        fixtures=FixtureStore(EXCHANGES_DIR),
        env=SENTINEL_ENV,
    )
    cache = ResponseCache(tmp_path / "cache.sqlite")
    return Workbench(registry, cache, gateway)


def make_replay_bench(tmp_path: Path, name: str = "cache.sqlite") -> Workbench:
    gateway = Gateway(
        mode="replay-only",
        fixtures=FixtureStore(EXCHANGES_DIR),
        env=SENTINEL_ENV,
    )
    return Workbench(default_registry(), ResponseCache(tmp_path / name), gateway)


def load_scenario(name: str) -> Scenario:
    doc = json.loads((SCENARIOS_DIR / name).read_text("utf-8"))
    return Scenario.from_json(doc)


def all_scenarios() -> list[str]:
    return sorted(p.name for p in SCENARIOS_DIR.glob("*.json"))


def run_all_scenarios(bench: Workbench):
    contexts = []
    for name in all_scenarios():
        contexts.append(run_scenario(bench, load_scenario(name)))
    return contexts
