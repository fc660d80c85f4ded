#!/usr/bin/env python3
"""Regenerate the bundled fixture corpus, scenario files, and goldens.

Synthesizes plausible provider payloads for a fixed gazetteer of places,
runs every scenario through the real tool pipeline (so fixtures land
under the exact cache keys replay will compute), then freezes golden
exports. Fully deterministic: rerunning produces byte-identical files.

Usage: python tools/make_fixtures.py
"""

from __future__ import annotations

import hashlib
import json
import math
import random
import sys
from pathlib import Path

from geoqa.adapters import default_registry
from geoqa.cache import ResponseCache, canonical_key
from geoqa.context import render_structured
from geoqa.dataset import export_json
from geoqa.exchange import Fixture, FixtureStore, RawExchange
from geoqa.gateway import Gateway
from geoqa.jsonutil import canonical_bytes, canonical_dumps
from geoqa.model import LatLng, haversine_distance
from geoqa.polyline import decode_polyline, encode_polyline
from geoqa.serialize import parse_timestamp
from geoqa.workbench import Scenario, Workbench, run_scenario

REPO = Path(__file__).resolve().parents[1]
FIXTURES = REPO / "tests" / "fixtures"
EXCHANGES = FIXTURES / "exchanges"
SCENARIOS = FIXTURES / "scenarios"
GOLDEN = FIXTURES / "golden"

BASE_TS = parse_timestamp("2025-03-01T09:00:00Z")

CITIES = [
    ("London", 51.5074, -0.1278),
    ("Rome", 41.9028, 12.4964),
    ("Berlin", 52.5200, 13.4050),
    ("Madrid", 40.4168, -3.7038),
    ("Tokyo", 35.6762, 139.6503),
    ("New York", 40.7128, -74.0060),
    ("Sydney", -33.8688, 151.2093),
    ("Cairo", 30.0444, 31.2357),
    ("Toronto", 43.6532, -79.3832),
    ("Lisbon", 38.7223, -9.1393),
    ("Vienna", 48.2082, 16.3738),
    ("Prague", 50.0755, 14.4378),
    ("Amsterdam", 52.3676, 4.9041),
    ("Oslo", 59.9139, 10.7522),
    ("Helsinki", 60.1699, 24.9384),
    ("Warsaw", 52.2297, 21.0122),
    ("Athens", 37.9838, 23.7275),
    ("Dublin", 53.3498, -6.2603),
    ("Budapest", 47.4979, 19.0402),
    ("Zurich", 47.3769, 8.5417),
]

FIRST = ["Café", "Bistro", "Trattoria", "Brasserie", "Osteria", "Taverna", "Cantina", "Diner"]
SECOND = [
    "Aurora", "Luna", "Verde", "Royale", "Marina", "Sol", "Bella", "Nord",
    "Est", "Flora", "Mokka", "Perla", "Azur", "Rustica", "Nova", "Onda",
]
STREETS = [
    "Market Street", "River Road", "Old Town Lane", "Garden Avenue",
    "Castle Walk", "Harbor Way", "Station Road", "Bridge Street",
]
REVIEWS = [
    "Worth every minute of the visit.",
    "Crowded at noon but the collection is superb.",
    "Friendly staff and clear signage.",
    "The audio guide makes the history come alive.",
]
HOURS = [
    "Monday: 9:00 AM - 6:00 PM",
    "Tuesday: 9:00 AM - 6:00 PM",
    "Wednesday: 9:00 AM - 9:00 PM",
    "Thursday: 9:00 AM - 6:00 PM",
    "Friday: 9:00 AM - 9:00 PM",
    "Saturday: 9:00 AM - 6:00 PM",
    "Sunday: closed",
]


def slug(name: str) -> str:
    return name.lower().replace(" ", "-")


def build_gazetteer() -> dict:
    gaz = {
        "louvre": dict(
            name="Louvre Museum", lat=48.8606, lng=2.3376,
            address="Rue de Rivoli, 75001 Paris", rating=4.7, price=2,
            hours=HOURS, reviews=REVIEWS[:2], wheelchair=True, city="Paris",
        ),
        "tuileries": dict(
            name="Tuileries Garden", lat=48.8634, lng=2.3275,
            address="Place de la Concorde, 75001 Paris", rating=4.6, price=None,
            hours=None, reviews=None, wheelchair=False, city="Paris",
        ),
        "eiffel": dict(
            name="Eiffel Tower", lat=48.8584, lng=2.2945,
            address="Champ de Mars, 75007 Paris", rating=4.6, price=3,
            hours=HOURS, reviews=REVIEWS[2:], wheelchair=True, city="Paris",
        ),
    }
    for city, lat, lng in CITIES:
        key = slug(city)
        rng = random.Random(f"gaz|{key}")
        gaz[f"{key}-museum"] = dict(
            name=f"{city} Museum of History",
            lat=round(lat + rng.uniform(-0.01, 0.01), 6),
            lng=round(lng + rng.uniform(-0.01, 0.01), 6),
            address=f"{rng.randrange(1, 200)} {rng.choice(STREETS)}, {city}",
            rating=round(rng.uniform(3.8, 4.9), 1),
            price=rng.choice([None, 1, 2, 2, 3]),
            hours=HOURS,
            reviews=[rng.choice(REVIEWS)],
            wheelchair=rng.random() < 0.7,
            city=city,
        )
        gaz[f"{key}-station"] = dict(
            name=f"{city} Central Station",
            lat=round(lat + rng.uniform(-0.02, 0.02), 6),
            lng=round(lng + rng.uniform(-0.02, 0.02), 6),
            address=f"{rng.randrange(1, 60)} Station Road, {city}",
            rating=round(rng.uniform(3.5, 4.4), 1),
            price=None, hours=None, reviews=None, wheelchair=True, city=city,
        )
        gaz[f"{key}-park"] = dict(
            name=f"{city} City Park",
            lat=round(lat + rng.uniform(-0.02, 0.02), 6),
            lng=round(lng + rng.uniform(-0.02, 0.02), 6),
            address=f"{city} old town",
            rating=round(rng.uniform(4.0, 4.8), 1),
            price=None, hours=None, reviews=None, wheelchair=False, city=city,
        )
    return gaz


GAZ = build_gazetteer()
BY_NAME = {e["name"]: (k, e) for k, e in GAZ.items()}

PRICE_TIERS = {
    0: "PRICE_LEVEL_FREE",
    1: "PRICE_LEVEL_INEXPENSIVE",
    2: "PRICE_LEVEL_MODERATE",
    3: "PRICE_LEVEL_EXPENSIVE",
    4: "PRICE_LEVEL_VERY_EXPENSIVE",
}


def offset(lat: float, lng: float, meters: float, bearing: float) -> tuple[float, float]:
    dlat = meters * math.cos(bearing) / 111_320.0
    dlng = meters * math.sin(bearing) / (111_320.0 * max(0.2, math.cos(math.radians(lat))))
    return round(lat + dlat, 6), round(lng + dlng, 6)


def restaurants_around(lat, lng, count, seed, with_ratings=True):
    rng = random.Random(f"nearby|{seed}|{lat:.4f}|{lng:.4f}|{count}")
    names = set()
    out = []
    while len(out) < count:
        name = f"{rng.choice(FIRST)} {rng.choice(SECOND)}"
        if name in names:
            name = f"{name} {len(out) + 1}"
        names.add(name)
        plat, plng = offset(lat, lng, rng.uniform(80, 1900), rng.uniform(0, 2 * math.pi))
        out.append(
            dict(
                name=name,
                lat=plat,
                lng=plng,
                address=f"{rng.randrange(1, 250)} {rng.choice(STREETS)}",
                rating=round(rng.uniform(3.3, 4.9), 1) if with_ratings else None,
                price=rng.choice([1, 1, 2, 2, 3]) if with_ratings else None,
            )
        )
    rng.shuffle(out)  # provider order deliberately not distance order
    return out


def synth_path(a: dict, b: dict, variant: int = 0) -> list[LatLng]:
    rng = random.Random(f"path|{a['name']}|{b['name']}|{variant}")
    n = 24
    points = []
    for i in range(n + 1):
        t = i / n
        lat = a["lat"] + t * (b["lat"] - a["lat"])
        lng = a["lng"] + t * (b["lng"] - a["lng"])
        swing = math.sin(math.pi * t) * (0.0012 + 0.0016 * variant)
        lat += swing * (1 if variant % 2 == 0 else -1)
        lng += rng.uniform(-0.0002, 0.0002)
        points.append(LatLng(round(lat, 5), round(lng, 5)))
    return points


def path_metrics(points: list[LatLng], mode: str) -> tuple[int, int]:
    total = sum(
        haversine_distance(points[i], points[i + 1]) for i in range(len(points) - 1)
    )
    speed = {"DRIVE": 11.0, "WALK": 1.4, "BICYCLE": 4.5, "TWO_WHEELER": 12.0}[mode]
    return int(round(total)), int(round(total / speed))


def route_steps(distance: int, streets_seed: str) -> list[tuple[str, int]]:
    rng = random.Random(f"steps|{streets_seed}")
    s1, s2, s3 = rng.sample(STREETS, 3)
    cuts = [0.35, 0.30, 0.25]
    parts = [int(distance * c) for c in cuts]
    parts.append(distance - sum(parts))
    return [
        (f"Head east on {s1}", parts[0]),
        (f"Turn left onto {s2}", parts[1]),
        (f"Continue onto {s3}", parts[2]),
        ("Arrive at your destination", parts[3]),
    ]


# --- provider payload builders ------------------------------------------


def g_place(key_or_entry, rich=True, place_id=None):
    entry = GAZ[key_or_entry] if isinstance(key_or_entry, str) else key_or_entry
    pid = place_id or f"g-{slug(entry['name'])}"
    doc = {
        "id": pid,
        "displayName": {"text": entry["name"]},
        "shortFormattedAddress": entry["address"],
        "location": {"latitude": entry["lat"], "longitude": entry["lng"]},
        "types": ["point_of_interest"],
        "googleMapsUri": f"https://maps.example/?q={slug(entry['name'])}",
        "viewport": {
            "low": {"latitude": entry["lat"] - 0.003, "longitude": entry["lng"] - 0.004},
            "high": {"latitude": entry["lat"] + 0.003, "longitude": entry["lng"] + 0.004},
        },
    }
    if rich:
        if entry.get("rating") is not None:
            doc["rating"] = entry["rating"]
            doc["userRatingCount"] = 1200 + (hash_int(entry["name"]) % 9000)
        if entry.get("price") is not None:
            doc["priceLevel"] = PRICE_TIERS[entry["price"]]
        if entry.get("hours"):
            doc["regularOpeningHours"] = {"weekdayDescriptions": entry["hours"]}
        if entry.get("reviews"):
            doc["reviews"] = [{"text": {"text": r}, "rating": 5} for r in entry["reviews"]]
        if entry.get("wheelchair"):
            doc["accessibilityOptions"] = {"wheelchairAccessibleEntrance": True}
    return doc


def hash_int(text: str) -> int:
    return int(hashlib.sha256(text.encode()).hexdigest()[:8], 16)


def g_restaurant(r):
    entry = dict(
        name=r["name"], lat=r["lat"], lng=r["lng"], address=r["address"],
        rating=r["rating"], price=r["price"], hours=None, reviews=None, wheelchair=False,
    )
    return g_place(entry, rich=True, place_id=f"g-r-{slug(r['name'])}")


def tt_result(entry, place_id, dist=None):
    doc = {
        "type": "POI",
        "id": place_id,
        "score": 2.5,
        "poi": {"name": entry["name"], "categorySet": [{"id": 7315}]},
        "address": {"freeformAddress": entry["address"]},
        "position": {"lat": entry["lat"], "lon": entry["lng"]},
        "viewport": {
            "topLeftPoint": {"lat": entry["lat"] + 0.002, "lon": entry["lng"] - 0.002},
            "btmRightPoint": {"lat": entry["lat"] - 0.002, "lon": entry["lng"] + 0.002},
        },
    }
    if dist is not None:
        doc["dist"] = dist
    return doc


class SynthGateway:
    """Gateway stand-in that invents payloads and records them as fixtures."""

    def __init__(self, store: FixtureStore):
        self.store = store
        self.calls = 0
        self.network_calls = 0

    def execute(self, template, *, provider, tool, unified_query):
        key = canonical_key(template, provider, tool)
        existing = self.store.load(key)
        if existing is not None:
            return existing.exchange
        raw = self.synthesize(provider.value, tool.value, unified_query)
        fetched = BASE_TS.fromtimestamp(BASE_TS.timestamp() + 60 * self.calls, tz=BASE_TS.tzinfo)
        self.calls += 1
        exchange = RawExchange(
            request_template=template,
            status=200,
            raw_response=raw,
            latency_ms=0,
            fetched_at=fetched,
        )
        self.store.save(key, Fixture(provider, tool, unified_query, exchange))
        return exchange

    def synthesize(self, provider: str, tool: str, q) -> bytes:
        p = q.parameters
        if provider == "google":
            return self._google(tool, p)
        if provider == "tomtom":
            return self._tomtom(tool, p)
        if provider == "openstreetmap":
            return self._osm(tool, p)
        raise ValueError(f"no synthesizer for {provider}")

    # -- google --

    def _google(self, tool: str, p: dict) -> bytes:
        if tool == "text-search":
            places = [g_place(k, rich=False) for k in self._search_keys(p["query"])]
            return canonical_bytes({"places": places})
        if tool == "place-details":
            key = p["place_id"][2:]
            return canonical_bytes(g_place(self._entry_by_slug(key), rich=True, place_id=p["place_id"]))
        if tool == "nearby-search":
            anchor = p["anchor_location"]
            rs = restaurants_around(
                anchor["latitude"], anchor["longitude"], p.get("limit", 20), "google"
            )
            return canonical_bytes({"places": [g_restaurant(r) for r in rs]})
        if tool == "compute-routes":
            return canonical_bytes({"routes": self._google_routes(p)})
        # search-along-route
        points = decode_polyline(p["route_polyline"])
        rs = self._along_route(points, p.get("limit", 20), "google")
        return canonical_bytes({"places": [g_restaurant(r) for r in rs]})

    def _google_routes(self, p: dict) -> list:
        a = self._endpoint_entry(p["origin"])
        b = self._endpoint_entry(p["destination"])
        mode = p.get("travel_mode", "DRIVE")
        count = 2 if p.get("alternatives") else 1
        routes = []
        for variant in range(count):
            points = synth_path(a, b, variant)
            distance, duration = path_metrics(points, mode)
            steps = route_steps(distance, f"{a['name']}->{b['name']}|{variant}")
            routes.append(
                {
                    "distanceMeters": distance,
                    "duration": f"{duration}s",
                    "polyline": {"encodedPolyline": encode_polyline(points)},
                    "description": f"via {steps[1][0].split('onto ')[-1]}",
                    "legs": [
                        {
                            "steps": [
                                {
                                    "distanceMeters": d,
                                    "navigationInstruction": {"instructions": text},
                                }
                                for text, d in steps
                            ]
                        }
                    ],
                }
            )
        return routes

    # -- tomtom --

    def _tomtom(self, tool: str, p: dict) -> bytes:
        if tool == "text-search":
            results = [
                tt_result(GAZ[k], f"tt-{k}") for k in self._search_keys(p["query"])
            ]
            return canonical_bytes(
                {"summary": {"numResults": len(results)}, "results": results}
            )
        if tool == "place-details":
            key = p["place_id"][3:]
            return canonical_bytes(
                {"results": [tt_result(GAZ[key], p["place_id"])]}
            )
        if tool == "nearby-search":
            anchor = p["anchor_location"]
            rs = restaurants_around(
                anchor["latitude"], anchor["longitude"], p.get("limit", 20),
                "tomtom", with_ratings=False,
            )
            results = []
            for r in rs:
                entry = dict(name=r["name"], lat=r["lat"], lng=r["lng"], address=r["address"])
                dist = round(
                    haversine_distance(
                        LatLng(anchor["latitude"], anchor["longitude"]),
                        LatLng(r["lat"], r["lng"]),
                    ),
                    1,
                )
                results.append(tt_result(entry, f"tt-r-{slug(r['name'])}", dist=dist))
            return canonical_bytes(
                {"summary": {"numResults": len(results)}, "results": results}
            )
        if tool == "compute-routes":
            a = self._endpoint_entry(p["origin"])
            b = self._endpoint_entry(p["destination"])
            mode = p.get("travel_mode", "DRIVE")
            points = synth_path(a, b, 0)
            distance, duration = path_metrics(points, mode)
            steps = route_steps(distance, f"tt|{a['name']}->{b['name']}")
            return canonical_bytes(
                {
                    "formatVersion": "0.0.12",
                    "routes": [
                        {
                            "summary": {
                                "lengthInMeters": distance,
                                "travelTimeInSeconds": duration,
                            },
                            "legs": [
                                {
                                    "points": [
                                        {"latitude": pt.latitude, "longitude": pt.longitude}
                                        for pt in points
                                    ]
                                }
                            ],
                            "guidance": {
                                "instructions": [
                                    {"message": text, "lengthInMeters": d}
                                    for text, d in steps
                                ]
                            },
                        }
                    ],
                }
            )
        # search-along-route
        points = decode_polyline(p["route_polyline"])
        rs = self._along_route(points, p.get("limit", 20), "tomtom")
        results = [
            tt_result(
                dict(name=r["name"], lat=r["lat"], lng=r["lng"], address=r["address"]),
                f"tt-ar-{slug(r['name'])}",
                dist=50.0,
            )
            for r in rs
        ]
        return canonical_bytes({"summary": {"numResults": len(results)}, "results": results})

    # -- openstreetmap --

    def _osm(self, tool: str, p: dict) -> bytes:
        if tool == "text-search":
            docs = []
            for k in self._search_keys(p["query"]):
                entry = GAZ[k]
                docs.append(
                    {
                        "place_id": 100000 + (hash_int(k) % 800000),
                        "licence": "Data ODbL",
                        "osm_type": "way",
                        "osm_id": 5_000_000 + (hash_int(k) % 900_000),
                        "lat": str(entry["lat"]),
                        "lon": str(entry["lng"]),
                        "category": "tourism",
                        "type": "museum",
                        "importance": 0.61,
                        "name": entry["name"],
                        "display_name": f"{entry['name']}, {entry['address']}",
                    }
                )
            return canonical_bytes(docs)
        if tool == "place-details":
            key = self._osm_key_for(int(p["place_id"]))
            entry = GAZ[key]
            extratags = {}
            if entry.get("hours"):
                extratags["opening_hours"] = "Mo-Su 09:00-18:00"
            if entry.get("wheelchair"):
                extratags["wheelchair"] = "yes"
            return canonical_bytes(
                {
                    "place_id": int(p["place_id"]),
                    "osm_type": "W",
                    "localname": entry["name"],
                    "names": {"name": entry["name"]},
                    "addresstags": {"road": entry["address"].split(",")[0], "city": entry["city"]},
                    "centroid": {"type": "Point", "coordinates": [entry["lng"], entry["lat"]]},
                    "extratags": extratags,
                    "rank_address": 30,
                }
            )
        # compute-routes via graphhopper
        a = self._endpoint_entry(p["origin"])
        b = self._endpoint_entry(p["destination"])
        mode = p.get("travel_mode", "DRIVE")
        points = synth_path(a, b, 0)
        distance, duration = path_metrics(points, mode)
        steps = route_steps(distance, f"gh|{a['name']}->{b['name']}")
        return canonical_bytes(
            {
                "hints": {"visited_nodes.sum": 120},
                "paths": [
                    {
                        "distance": float(distance),
                        "time": duration * 1000,
                        "points": encode_polyline(points),
                        "points_encoded": True,
                        "instructions": [
                            {"text": text, "distance": float(d)} for text, d in steps
                        ],
                    }
                ],
            }
        )

    # -- shared lookups --

    def _search_keys(self, query: str) -> list[str]:
        q = query.lower()
        if "louvre" in q:
            return ["louvre", "tuileries"]
        if "eiffel" in q:
            return ["eiffel"]
        for city, _, _ in CITIES:
            if city.lower() in q:
                key = slug(city)
                return [f"{key}-museum", f"{key}-station", f"{key}-park"]
        raise ValueError(f"no gazetteer hit for query {query!r}")

    def _entry_by_slug(self, name_slug: str) -> dict:
        for entry in GAZ.values():
            if slug(entry["name"]) == name_slug:
                return entry
        raise KeyError(name_slug)

    def _osm_key_for(self, place_id: int) -> str:
        for k in GAZ:
            if 100000 + (hash_int(k) % 800000) == place_id:
                return k
        raise KeyError(place_id)

    def _endpoint_entry(self, endpoint: dict) -> dict:
        lat, lng = endpoint["latitude"], endpoint["longitude"]
        for entry in GAZ.values():
            if abs(entry["lat"] - lat) < 1e-6 and abs(entry["lng"] - lng) < 1e-6:
                return entry
        return dict(name=f"point({lat},{lng})", lat=lat, lng=lng, address="")

    def _along_route(self, points, count, seed):
        rng = random.Random(f"salr|{seed}|{len(points)}|{count}")
        picks = [points[int(i * (len(points) - 1) / max(1, count - 1))] for i in range(count)]
        out = []
        names = set()
        for i, pt in enumerate(picks):
            name = f"{rng.choice(FIRST)} {rng.choice(SECOND)}"
            if name in names:
                name = f"{name} {i + 1}"
            names.add(name)
            lat, lng = offset(pt.latitude, pt.longitude, rng.uniform(20, 120), rng.uniform(0, 2 * math.pi))
            out.append(
                dict(
                    name=name, lat=lat, lng=lng,
                    address=f"{rng.randrange(1, 120)} {rng.choice(STREETS)}",
                    rating=round(rng.uniform(3.4, 4.8), 1),
                    price=rng.choice([1, 2, 2, 3]),
                )
            )
        return out


# --- scenario construction ------------------------------------------------


def loc(key: str) -> dict:
    return {"latitude": GAZ[key]["lat"], "longitude": GAZ[key]["lng"]}


def paris_scenario() -> dict:
    return {
        "title": "Paris: Louvre study",
        "steps": [
            {"tool": "text-search", "provider": "google", "parameters": {"query": "Louvre Museum", "limit": 5}},
            {"tool": "text-search", "provider": "google", "parameters": {"query": "Eiffel Tower", "limit": 5}},
            {"tool": "place-details", "provider": "google", "parameters": {"place_id": {"$place_id": "Louvre Museum"}}},
            {
                "tool": "nearby-search",
                "provider": "google",
                "parameters": {
                    "anchor_place_id": {"$place_id": "Louvre Museum"},
                    "category": "restaurant",
                    "limit": 20,
                    "ranking": "distance",
                },
            },
            {
                "tool": "compute-routes",
                "provider": "google",
                "parameters": {
                    "origin": {"$place_location": "Eiffel Tower"},
                    "destination": {"$place_location": "Louvre Museum"},
                    "travel_mode": "DRIVE",
                    "alternatives": True,
                },
            },
            {
                "tool": "search-along-route",
                "provider": "google",
                "parameters": {
                    "query": "restaurant",
                    "limit": 20,
                    "route_polyline": {"$route_polyline": 0},
                },
            },
        ],
        "qa": [],  # filled after a dry run
    }


def tomtom_scenario() -> dict:
    return {
        "title": "Paris via TomTom",
        "steps": [
            {"tool": "text-search", "provider": "tomtom", "parameters": {"query": "Louvre Museum"}},
            {"tool": "place-details", "provider": "tomtom", "parameters": {"place_id": {"$place_id": "Louvre Museum"}}},
            {
                "tool": "nearby-search",
                "provider": "tomtom",
                "parameters": {
                    "anchor_place_id": {"$place_id": "Louvre Museum"},
                    "category": "restaurant",
                    "limit": 20,
                    "ranking": "distance",
                },
            },
            {
                "tool": "compute-routes",
                "provider": "tomtom",
                "parameters": {
                    "origin": loc("eiffel"),
                    "destination": loc("louvre"),
                    "travel_mode": "DRIVE",
                },
            },
            {
                "tool": "search-along-route",
                "provider": "tomtom",
                "parameters": {
                    "query": "restaurant",
                    "limit": 20,
                    "route_polyline": {"$route_polyline": 0},
                },
            },
        ],
        "qa": [],
    }


def osm_scenario() -> dict:
    return {
        "title": "Paris via OpenStreetMap",
        "steps": [
            {"tool": "text-search", "provider": "openstreetmap", "parameters": {"query": "Louvre Museum"}},
            {"tool": "place-details", "provider": "openstreetmap", "parameters": {"place_id": {"$place_id": "Louvre Museum"}}},
            {
                "tool": "compute-routes",
                "provider": "openstreetmap",
                "parameters": {
                    "origin": loc("eiffel"),
                    "destination": loc("louvre"),
                    "travel_mode": "DRIVE",
                },
            },
        ],
        "qa": [],
    }


def city_scenario(index: int, city: str) -> dict:
    key = slug(city)
    steps = [
        {"tool": "text-search", "provider": "google", "parameters": {"query": f"{city} attractions", "limit": 5}},
        {"tool": "place-details", "provider": "google", "parameters": {"place_id": {"$place_id": f"{city} Museum of History"}}},
        {
            "tool": "nearby-search",
            "provider": "google",
            "parameters": {
                "anchor_place_id": {"$place_id": f"{city} Museum of History"},
                "category": "restaurant",
                "limit": 8 + index % 8,
                "ranking": "distance",
            },
        },
    ]
    if index % 2 == 0:
        steps.append(
            {
                "tool": "compute-routes",
                "provider": "google",
                "parameters": {
                    "origin": {"$place_location": f"{city} Museum of History"},
                    "destination": {"$place_location": f"{city} Central Station"},
                    "travel_mode": "DRIVE" if index % 4 else "WALK",
                },
            }
        )
    if index % 4 == 0:
        steps.append(
            {
                "tool": "search-along-route",
                "provider": "google",
                "parameters": {
                    "query": "restaurant",
                    "limit": 10,
                    "route_polyline": {"$route_polyline": 0},
                },
            }
        )
    return {"title": f"{city} city guide", "steps": steps, "qa": []}


def derive_qa(ctx, scenario_doc: dict, rng: random.Random, full_set: bool) -> list[dict]:
    """Author QA drafts from the context the steps produced."""
    qa = []
    index = ctx.place_index
    anchor = None
    for entry in ctx.entries:
        if entry.tool.value == "place-details" and entry.normalized.places:
            anchor = entry.normalized.places[0]
            break
    nearby = None
    nearby_anchor = None
    for entry in ctx.entries:
        if entry.tool.value == "nearby-search" and entry.normalized.places:
            nearby = list(entry.normalized.places)
            loc_param = entry.unified_query.get("anchor_location")
            nearby_anchor = LatLng(loc_param["latitude"], loc_param["longitude"])
            break

    if anchor is not None and anchor.rating is not None:
        qa.append(
            {
                "question": f"What is the rating of @{anchor.display_name}?",
                "format": "OpenEnded",
                "gold": str(anchor.rating),
                "categories": ["place-info"],
            }
        )
    if nearby is not None and len(nearby) >= 4 and anchor is not None:
        nearest = min(nearby, key=lambda p: haversine_distance(nearby_anchor, p.location))
        others = [p.display_name for p in nearby if p.display_name != nearest.display_name]
        options = [nearest.display_name] + rng.sample(others, 3)
        rng.shuffle(options)
        qa.append(
            {
                "question": f"Which restaurant is closest to @{anchor.display_name}?",
                "format": "SingleChoice",
                "options": options,
                "gold": options.index(nearest.display_name),
                "categories": ["spatial"],
            }
        )
    if full_set and anchor is not None and anchor.accessibility:
        qa.append(
            {
                "question": f"Does @{anchor.display_name} offer wheelchair access?",
                "format": "YesNo",
                "gold": "Yes",
                "categories": ["accessibility"],
            }
        )
    if full_set:
        search_entry = ctx.entries[0]
        found = [p.display_name for p in search_entry.normalized.places]
        decoys = ["British Museum", "Colosseum"]
        options = found[:2] + decoys
        qa.append(
            {
                "question": "Which of these places appear in the search results for 'Louvre Museum'?",
                "format": "MultipleChoice",
                "options": options,
                "gold": [0, 1],
                "categories": ["retrieval"],
            }
        )
    if anchor is not None and not qa:
        qa.append(
            {
                "question": f"What is the address of @{anchor.display_name}?",
                "format": "OpenEnded",
                "gold": anchor.short_address,
                "categories": ["place-info"],
            }
        )
    return qa


def main() -> int:
    import shutil

    for d in (EXCHANGES, SCENARIOS, GOLDEN):
        if d.exists():
            shutil.rmtree(d)
        d.mkdir(parents=True)

    store = FixtureStore(EXCHANGES)
    gateway = SynthGateway(store)
    bench = Workbench(default_registry(), ResponseCache(":memory:"), gateway)

    scenario_docs: list[tuple[str, dict, bool]] = [
        ("paris.json", paris_scenario(), True),
        ("paris_tomtom.json", tomtom_scenario(), False),
        ("paris_osm.json", osm_scenario(), False),
    ]
    for i, (city, _, _) in enumerate(CITIES):
        scenario_docs.append((f"city_{i:02d}_{slug(city)}.json", city_scenario(i, city), False))

    for name, doc, full_set in scenario_docs:
        ctx = run_scenario(bench, Scenario.from_json(doc))
        rng = random.Random(f"qa|{name}")
        doc["qa"] = derive_qa(ctx, doc, rng, full_set)
        # validate the drafts are acceptable before freezing
        run_scenario(bench, Scenario.from_json({**doc, "steps": doc["steps"]}))
        (SCENARIOS / name).write_text(canonical_dumps(doc) + "\n", "utf-8")

    # golden export: replay the paris scenario on a fresh replay bench
    replay = Workbench(
        default_registry(),
        ResponseCache(":memory:"),
        Gateway(mode="replay-only", fixtures=store, env={}),
    )
    paris_doc = json.loads((SCENARIOS / "paris.json").read_text("utf-8"))
    ctx = run_scenario(replay, Scenario.from_json(paris_doc))
    (GOLDEN / "paris_structured.txt").write_text(render_structured(ctx), "utf-8")
    (GOLDEN / "paris_dataset.json").write_bytes(export_json(replay.export_dataset()))

    print(f"fixtures: {len(store)}")
    print(f"scenarios: {len(scenario_docs)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
