"""Deterministic synthetic city generator for tests, studies and benchmarks.

The city has neighborhoods, visitor personas with distinct demographic
signatures, category tastes and active hours, and per-neighborhood persona
hotspots that concentrate check-ins.  Visits happen in short outings (a few
check-ins within two days around one neighborhood), which gives every visitor
a meaningful near-future evaluation set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timedelta

import numpy as np

from .dataset import Dataset, DatasetConfig, load_dataset

CITY_CENTER = (48.8600, 2.3400)

PERSONAS = [
    {
        "name": "foodie",
        "categories": ["food", "restaurant"],
        "buckets": ("many", "very few", "very few", "many", "some"),
        "hour_weights": {"morning": 0.20, "afternoon": 0.30, "evening": 0.32, "night": 0.18},
    },
    {
        "name": "athlete",
        "categories": ["sport fields", "park", "health and fitness", "bowling", "tennis court", "ice skating", "gym"],
        "buckets": ("many", "some", "few", "some", "few"),
        "hour_weights": {"morning": 0.38, "afternoon": 0.26, "evening": 0.22, "night": 0.14},
    },
    {
        "name": "culture",
        "categories": ["museum", "art", "gallery", "library", "sculpture", "bookstore", "movie theater", "historical landmark", "monument"],
        "buckets": ("few", "many", "very few", "very few", "many"),
        "hour_weights": {"morning": 0.30, "afternoon": 0.36, "evening": 0.20, "night": 0.14},
    },
    {
        "name": "nightowl",
        "categories": ["nightlife", "entertainment", "community"],
        "buckets": ("some", "few", "many", "few", "very few"),
        "hour_weights": {"morning": 0.14, "afternoon": 0.18, "evening": 0.34, "night": 0.34},
    },
    {
        "name": "metime",
        "categories": ["outdoor", "food", "tea room", "bar", "coffee shop"],
        "buckets": ("very few", "many", "some", "many", "very few"),
        "hour_weights": {"morning": 0.34, "afternoon": 0.32, "evening": 0.20, "night": 0.14},
    },
    {
        "name": "shopper",
        "categories": ["shopping", "travel", "ice skating"],
        "buckets": ("some", "very few", "some", "some", "many"),
        "hour_weights": {"morning": 0.24, "afternoon": 0.38, "evening": 0.24, "night": 0.14},
    },
]

BACKGROUND_CATEGORIES = [
    "community", "travel", "entertainment", "shopping", "nightlife",
    "outdoor", "ice skating",
]

HOUR_RANGES = {"morning": (5, 11), "afternoon": (12, 17), "evening": (18, 22), "night": (23, 28)}

# raw-value ranges producing each Table-style bucket, per attribute
_BUCKET_RANGES = {
    "items": [(0, 2), (3, 3), (4, 5), (6, 15)],
    "photos": [(0, 1), (2, 2), (3, 5), (6, 15)],
    "friends": [(0, 1), (2, 3), (4, 5), (6, 15)],
    "check-ins": [(0, 3), (4, 12), (13, 34), (35, 100)],
    "places": [(0, 3), (4, 9), (10, 23), (24, 70)],
}
_BUCKET_ORDER = ("very few", "few", "some", "many")
_ATTRS = ("items", "photos", "friends", "check-ins", "places")


@dataclass(frozen=True)
class CityConfig:
    seed: int = 7
    n_pois: int = 5000
    n_visitors: int = 2000
    mean_outings: float = 2.6
    neighborhoods: int = 24
    neighborhood_sigma_m: float = 130.0
    hotspots_per_persona: int = 15


def _offset_deg(north_m: float, east_m: float, lat: float) -> tuple[float, float]:
    dlat = math.degrees(north_m / 6_371_000.0)
    dlon = math.degrees(east_m / (6_371_000.0 * math.cos(math.radians(lat))))
    return dlat, dlon


def generate_rows(config: CityConfig = CityConfig()):
    """Produce (poi_rows, visitor_rows, checkin_rows) as JSON-ready dicts."""
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    lat0, lon0 = CITY_CENTER

    # neighborhood centers on a jittered grid, ~1.3 km apart
    nb_centers = []
    cols = 4
    rows_n = int(math.ceil(config.neighborhoods / cols))
    for i in range(config.neighborhoods):
        gx, gy = i % cols, i // cols
        north = (gy - (rows_n - 1) / 2) * 1300 + rng.normal(0, 90)
        east = (gx - (cols - 1) / 2) * 1300 + rng.normal(0, 90)
        dlat, dlon = _offset_deg(north, east, lat0)
        nb_centers.append((lat0 + dlat, lon0 + dlon))

    # neighborhood character: two dominant personas per neighborhood get
    # extra POI slots and extra residents (districts have a crowd)
    n_personas = len(PERSONAS)
    dominants: list[tuple[int, int]] = []
    for nb in range(config.neighborhoods):
        a = int(rng.integers(n_personas))
        b = (a + 1 + int(rng.integers(n_personas - 1))) % n_personas
        dominants.append((a, b))
    # POI slot layout per neighborhood: dominant personas get two slots,
    # the rest one, plus two background slots
    slot_layouts = []
    for nb in range(config.neighborhoods):
        slots = list(range(n_personas)) + list(dominants[nb]) + [n_personas, n_personas]
        slot_layouts.append(slots)

    # POIs: guarantee persona-category coverage per neighborhood, rest background
    poi_rows = []
    pois_by_nb_persona: dict[tuple[int, int], list[str]] = {}
    pois_by_nb: dict[int, list[str]] = {i: [] for i in range(config.neighborhoods)}
    per_nb = config.n_pois // config.neighborhoods
    poi_seq = 0
    base_date = datetime(2004, 1, 1)
    for nb in range(config.neighborhoods):
        clat, clon = nb_centers[nb]
        layout = slot_layouts[nb]
        for j in range(per_nb):
            persona_slot = layout[j % len(layout)]
            if persona_slot < n_personas:
                pcats = PERSONAS[persona_slot]["categories"]
                # venues of one crowd share their scene's base categories
                cats = list(dict.fromkeys(
                    pcats[:2] + [pcats[int(rng.integers(len(pcats)))]]
                ))
            else:
                cats = [BACKGROUND_CATEGORIES[int(rng.integers(len(BACKGROUND_CATEGORIES)))]]
                if rng.random() < 0.05:
                    extra = BACKGROUND_CATEGORIES[int(rng.integers(len(BACKGROUND_CATEGORIES)))]
                    if extra not in cats:
                        cats.append(extra)
            north = rng.normal(0, config.neighborhood_sigma_m)
            east = rng.normal(0, config.neighborhood_sigma_m)
            dlat, dlon = _offset_deg(north, east, clat)
            inserted = base_date + timedelta(days=int(rng.integers(0, 1600)))
            rating = None
            if rng.random() > 0.2:
                rating = round(float(np.clip(rng.normal(3.0, 0.8), 0.0, 5.0)), 1)
            pid = f"p{poi_seq:05d}"
            poi_seq += 1
            row = {
                "id": pid,
                "lat": round(clat + dlat, 6),
                "lon": round(clon + dlon, 6),
                "inserted": inserted.date().isoformat(),
                "checkins": 0,  # filled after visit generation
                "radius_m": round(float(rng.lognormal(3.3, 0.6)), 1),
                "categories": cats,
            }
            if rating is not None:
                row["rating"] = rating
            poi_rows.append(row)
            pois_by_nb[nb].append(pid)
            if persona_slot < n_personas:
                pois_by_nb_persona.setdefault((nb, persona_slot), []).append(pid)

    # persona hotspot pool per neighborhood with gently decaying popularity
    hotspots: dict[tuple[int, int], tuple[list[str], np.ndarray]] = {}
    for (nb, slot), pids in pois_by_nb_persona.items():
        chosen = list(pids[: config.hotspots_per_persona])
        w = np.array([1.0 / (i + 1) ** 0.3 for i in range(len(chosen))])
        hotspots[(nb, slot)] = (chosen, w / w.sum())

    # visitors with persona-shaped demographics and home neighborhoods
    visitor_rows = []
    visitor_meta = []
    # residents concentrate where their persona dominates
    home_weights = np.ones((n_personas, config.neighborhoods))
    for nb, (a, b) in enumerate(dominants):
        home_weights[a, nb] += 13.0
        home_weights[b, nb] += 13.0
    home_weights /= home_weights.sum(axis=1, keepdims=True)
    for v in range(config.n_visitors):
        persona_idx = v % len(PERSONAS)
        persona = PERSONAS[persona_idx]
        home = int(rng.choice(config.neighborhoods, p=home_weights[persona_idx]))
        demogs = {}
        for attr, target in zip(_ATTRS, persona["buckets"]):
            b = _BUCKET_ORDER.index(target)
            if rng.random() < 0.05:  # demographic noise: slide to a neighbor bucket
                b = min(3, max(0, b + (1 if rng.random() < 0.5 else -1)))
            lo, hi = _BUCKET_RANGES[attr][b]
            demogs[attr] = int(rng.integers(lo, hi + 1))
        vid = f"u{v:05d}"
        visitor_rows.append({"id": vid, "demogs": demogs})
        # individual taste: a personal subset of the persona's hotspots, so
        # cohorts sharing one POI share others (a walkable co-visit graph)
        pids, w = hotspots[(home, persona_idx)]
        n_fav = min(len(pids), 6)
        fav_idx = rng.choice(len(pids), size=n_fav, replace=False, p=w)
        favorites = [pids[i] for i in fav_idx]
        visitor_meta.append((vid, persona_idx, home, favorites))

    # check-ins in outings: mostly the visitor's own favorite venues
    checkin_rows = []
    poi_counts = {row["id"]: 0 for row in poi_rows}
    hour_names = list(HOUR_RANGES)
    for vid, persona_idx, home, favorites in visitor_meta:
        persona = PERSONAS[persona_idx]
        hw = np.array([persona["hour_weights"][h] for h in hour_names])
        n_outings = int(rng.poisson(config.mean_outings)) + 2
        for _ in range(n_outings):
            at_home = rng.random() < 0.85
            nb = home if at_home else int(rng.integers(config.neighborhoods))
            day = int(rng.integers(0, 330))
            bucket = hour_names[int(rng.choice(len(hour_names), p=hw))]
            h_lo, h_hi = HOUR_RANGES[bucket]
            hour = int(rng.integers(h_lo, h_hi + 1))
            t = datetime(2010, 1, 1) + timedelta(
                days=day, hours=hour % 24, minutes=int(rng.integers(0, 60))
            )
            length = int(rng.integers(5, 12))
            seen: set[str] = set()
            for _ in range(length):
                u = rng.random()
                if at_home and u < 0.75:
                    pid = favorites[int(rng.integers(len(favorites)))]
                elif u < 0.87:
                    pids, w = hotspots[(nb, persona_idx)]
                    pid = pids[int(rng.choice(len(pids), p=w))]
                elif u < 0.96:
                    pool = pois_by_nb[nb]
                    pid = pool[int(rng.integers(len(pool)))]
                else:
                    pid = poi_rows[int(rng.integers(len(poi_rows)))]["id"]
                if pid in seen:
                    continue
                seen.add(pid)
                checkin_rows.append({"user": vid, "poi": pid, "ts": t.isoformat()})
                poi_counts[pid] += 1
                t = t + timedelta(hours=float(rng.uniform(0.2, 4.0)))

    # exported check-in counters are lifetime values dominated by history
    # outside the sampled window, so popularity rank does not simply mirror
    # the sampled visits
    for row in poi_rows:
        legacy = int(rng.lognormal(5.5, 1.1))
        row["checkins"] = poi_counts[row["id"]] + legacy

    checkin_rows.sort(key=lambda r: (r["ts"], r["user"], r["poi"]))
    return poi_rows, visitor_rows, checkin_rows


def generate_dataset(config: CityConfig = CityConfig()) -> Dataset:
    poi_rows, visitor_rows, checkin_rows = generate_rows(config)
    return load_dataset(poi_rows, visitor_rows, checkin_rows, DatasetConfig())


def write_jsonl(rows, path) -> None:
    import json

    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
