"""Check-in dataset ingestion: POIs, visitors, check-ins and derived statistics.

Sources are JSON-lines files (or iterables of already-parsed row dicts).  The
loaded dataset is immutable and carries everything downstream stages need:
per-POI check-in lists with precomputed time categories, normalization
statistics, the demographic bucket table and the integer item dictionary used
by transaction mining.
"""

from __future__ import annotations

import gzip
import json
import logging
import math
import pickle
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable, Iterator

log = logging.getLogger(__name__)

EARTH_RADIUS_M = 6_371_000.0

DEMOG_ATTRIBUTES = ("items", "photos", "friends", "check-ins", "places")
BUCKET_NAMES = ("very few", "few", "some", "many")

# Upper bounds (t1, t2, t3) per attribute: very few <= t1 < few <= t2 < some <= t3 < many.
# Intervals are left-exclusive / right-inclusive, so e.g. friends=5 is "some".
DEFAULT_BUCKET_BOUNDS: dict[str, tuple[float, float, float]] = {
    "items": (2, 3, 5),
    "photos": (1, 2, 5),
    "friends": (1, 3, 5),
    "check-ins": (3, 12, 34),
    "places": (3, 9, 23),
}

HOURLY_BUCKETS = ("morning", "afternoon", "evening", "night")
WEEKLY_BUCKETS = ("weekday", "weekend")

UNCATEGORIZED = "uncategorized"


def _hourly_of(hour: int) -> str:
    if 5 <= hour <= 11:
        return "morning"
    if 12 <= hour <= 17:
        return "afternoon"
    if 18 <= hour <= 22:
        return "evening"
    return "night"  # 23, 0..4


class IngestError(ValueError):
    """Malformed or inconsistent input row."""

    def __init__(self, source: str, line: int, message: str):
        super().__init__(f"{source}:{line}: {message}")
        self.source = source
        self.line = line


@dataclass(frozen=True)
class DemographicBucket:
    attribute: str
    bucket: str


@dataclass(frozen=True)
class TimeCategory:
    hourly: str
    weekly: str


@dataclass(frozen=True)
class Poi:
    id: str
    lat: float
    lon: float
    inserted: date
    total_checkins: int
    radius_m: float
    categories: tuple[str, ...]  # sorted, never empty
    rating: float


@dataclass(frozen=True)
class Checkin:
    user: str
    poi: str
    ts: datetime  # naive local time
    hourly: str
    weekly: str


@dataclass(frozen=True)
class Visitor:
    id: str
    demogs: dict[str, float]
    checkins: tuple[Checkin, ...]  # sorted by timestamp


@dataclass(frozen=True)
class DatasetStats:
    max_poi_checkins: int
    max_radius_m: float
    oldest_insertion_date: date
    mean_rating: float
    city_area_m2: float
    category_universe: tuple[str, ...]


@dataclass(frozen=True)
class DatasetConfig:
    strict: bool = False
    utc_offset_hours: float = 0.0  # applied to timezone-aware timestamps
    refit_buckets: bool = False  # recompute equal-frequency quartiles per dataset
    default_rating: float = 0.5  # used when the dataset has no ratings at all


# ---------------------------------------------------------------------------
# Item dictionary: integer encoding of transaction payloads.

# payload shapes:
#   ("demog", attribute, bucket)
#   ("poi", poi_id)
#   ("cat", category)
#   ("cat_hour", category, hourly)
#   ("cat_week", category, weekly)
Payload = tuple


class ItemDictionary:
    """Dataset-scoped bijection between transaction payloads and integer ids."""

    def __init__(self, payloads: Iterable[Payload]):
        self._payloads: tuple[Payload, ...] = tuple(sorted(set(payloads)))
        self._ids: dict[Payload, int] = {p: i for i, p in enumerate(self._payloads)}

        self._kind_ranges: dict[str, tuple[int, int]] = {}
        for i, p in enumerate(self._payloads):
            kind = p[0]
            lo, _ = self._kind_ranges.get(kind, (i, i))
            self._kind_ranges[kind] = (lo, i + 1)

    def __len__(self) -> int:
        return len(self._payloads)

    def id_of(self, payload: Payload) -> int:
        return self._ids[payload]

    def payload_of(self, item_id: int) -> Payload:
        return self._payloads[item_id]

    def kind_of(self, item_id: int) -> str:
        return self._payloads[item_id][0]

    def kind_range(self, kind: str) -> tuple[int, int]:
        """Contiguous [lo, hi) id range of one payload kind (payloads are sorted)."""
        return self._kind_ranges.get(kind, (0, 0))

    @property
    def payloads(self) -> tuple[Payload, ...]:
        return self._payloads


class Dataset:
    """Immutable in-memory store; built once, then read-only."""

    def __init__(
        self,
        pois: dict[str, Poi],
        visitors: dict[str, Visitor],
        checkins: tuple[Checkin, ...],
        stats: DatasetStats,
        bucket_bounds: dict[str, tuple[float, float, float]],
        config: DatasetConfig,
    ):
        self.pois = pois
        self.visitors = visitors
        self.checkins = checkins
        self.stats = stats
        self.bucket_bounds = bucket_bounds
        self.config = config
        by_poi: dict[str, list[Checkin]] = {pid: [] for pid in pois}
        for c in checkins:
            by_poi[c.poi].append(c)
        self.checkins_by_poi: dict[str, tuple[Checkin, ...]] = {
            pid: tuple(rows) for pid, rows in by_poi.items()
        }
        self.items = _build_item_dictionary(self)
        self._visitor_items: dict[str, tuple[int, ...]] = {}
        self._checkin_items: dict[tuple[str, str, str], tuple[int, ...]] = {}

    def discretize(self, attribute: str, raw_value: float) -> DemographicBucket:
        return discretize(attribute, raw_value, self.bucket_bounds)

    def visitor_bucket_items(self, visitor: Visitor) -> tuple[int, ...]:
        """Item ids of the visitor's five demographic buckets (cached)."""
        cached = self._visitor_items.get(visitor.id)
        if cached is not None:
            return cached
        ids = []
        for attr in DEMOG_ATTRIBUTES:
            b = self.discretize(attr, visitor.demogs.get(attr, 0.0))
            ids.append(self.items.id_of(("demog", attr, b.bucket)))
        out = tuple(ids)
        self._visitor_items[visitor.id] = out
        return out

    def checkin_items(self, checkin: Checkin) -> tuple[int, ...]:
        """Item ids a check-in contributes to its visitor's transaction (cached)."""
        key = (checkin.poi, checkin.hourly, checkin.weekly)
        cached = self._checkin_items.get(key)
        if cached is not None:
            return cached
        ids = [self.items.id_of(("poi", checkin.poi))]
        for cat in self.pois[checkin.poi].categories:
            ids.append(self.items.id_of(("cat", cat)))
            ids.append(self.items.id_of(("cat_hour", cat, checkin.hourly)))
            ids.append(self.items.id_of(("cat_week", cat, checkin.weekly)))
        out = tuple(ids)
        self._checkin_items[key] = out
        return out


# ---------------------------------------------------------------------------
# Operations


def discretize(
    attribute: str,
    raw_value: float,
    bounds: dict[str, tuple[float, float, float]] | None = None,
) -> DemographicBucket:
    """Map a raw demographic value to its equal-frequency bucket."""
    table = bounds if bounds is not None else DEFAULT_BUCKET_BOUNDS
    if attribute not in table:
        raise ValueError(f"unknown demographic attribute: {attribute!r}")
    t1, t2, t3 = table[attribute]
    if raw_value <= t1:
        b = "very few"
    elif raw_value <= t2:
        b = "few"
    elif raw_value <= t3:
        b = "some"
    else:
        b = "many"
    return DemographicBucket(attribute, b)


def time_category(ts: datetime) -> TimeCategory:
    """Hourly and weekly bucket of a (local) timestamp."""
    hourly = _hourly_of(ts.hour)
    weekly = "weekend" if ts.isoweekday() >= 6 else "weekday"
    return TimeCategory(hourly, weekly)


def load_dataset(
    pois_source,
    visitors_source,
    checkins_source,
    config: DatasetConfig | None = None,
) -> Dataset:
    """Ingest the three JSON-lines sources into an immutable Dataset.

    Each source is a file path or an iterable of row dicts.  Dangling
    references (check-in pointing at an unknown POI or visitor) are skipped
    with a warning by default and rejected in strict mode.
    """
    cfg = config or DatasetConfig()

    pois: dict[str, Poi] = {}
    raw_ratings: list[float] = []
    missing_rating: list[str] = []
    for line_no, row, src in _rows(pois_source, "pois"):
        poi = _parse_poi(row, src, line_no)
        if poi.id in pois:
            raise IngestError(src, line_no, f"duplicate POI id {poi.id!r}")
        pois[poi.id] = poi
        if poi.rating >= 0:
            raw_ratings.append(poi.rating)
        else:
            missing_rating.append(poi.id)

    mean_rating = (
        sum(raw_ratings) / len(raw_ratings) if raw_ratings else cfg.default_rating
    )
    for pid in missing_rating:
        p = pois[pid]
        pois[pid] = Poi(
            p.id, p.lat, p.lon, p.inserted, p.total_checkins, p.radius_m,
            p.categories, mean_rating,
        )

    raw_visitors: dict[str, dict[str, float]] = {}
    for line_no, row, src in _rows(visitors_source, "visitors"):
        vid, demogs = _parse_visitor(row, src, line_no)
        if vid in raw_visitors:
            raise IngestError(src, line_no, f"duplicate visitor id {vid!r}")
        raw_visitors[vid] = demogs

    checkin_rows: list[Checkin] = []
    for line_no, row, src in _rows(checkins_source, "checkins"):
        c = _parse_checkin(row, src, line_no, cfg)
        if c.poi not in pois:
            if cfg.strict:
                raise IngestError(src, line_no, f"check-in references unknown POI {c.poi!r}")
            log.warning("skipping check-in at unknown POI %r (line %d)", c.poi, line_no)
            continue
        if c.user not in raw_visitors:
            if cfg.strict:
                raise IngestError(src, line_no, f"check-in references unknown visitor {c.user!r}")
            log.warning("skipping check-in by unknown visitor %r (line %d)", c.user, line_no)
            continue
        checkin_rows.append(c)

    checkin_rows.sort(key=lambda c: (c.ts, c.user, c.poi))
    by_user: dict[str, list[Checkin]] = {vid: [] for vid in raw_visitors}
    for c in checkin_rows:
        by_user[c.user].append(c)

    visitors = {
        vid: Visitor(vid, raw_visitors[vid], tuple(by_user[vid]))
        for vid in sorted(raw_visitors)
    }
    pois = {pid: pois[pid] for pid in sorted(pois)}

    stats = _compute_stats(pois, mean_rating)
    bounds = dict(DEFAULT_BUCKET_BOUNDS)
    if cfg.refit_buckets:
        bounds = _refit_bucket_bounds(visitors)

    return Dataset(pois, visitors, tuple(checkin_rows), stats, bounds, cfg)


def save_snapshot(dataset: Dataset, path: str | Path) -> None:
    """Write a deterministic binary snapshot (identical inputs give identical bytes)."""
    payload = {
        "pois": [
            (p.id, p.lat, p.lon, p.inserted.isoformat(), p.total_checkins,
             p.radius_m, p.categories, p.rating)
            for p in dataset.pois.values()
        ],
        "visitors": [
            (v.id, sorted(v.demogs.items())) for v in dataset.visitors.values()
        ],
        "checkins": [
            (c.user, c.poi, c.ts.isoformat()) for c in dataset.checkins
        ],
        "bucket_bounds": sorted(dataset.bucket_bounds.items()),
        "config": (
            dataset.config.strict,
            dataset.config.utc_offset_hours,
            dataset.config.refit_buckets,
            dataset.config.default_rating,
        ),
    }
    with open(path, "wb") as raw:
        # fixed mtime and no embedded name keep identical inputs byte-identical
        with gzip.GzipFile(
            filename="", fileobj=raw, mode="wb", compresslevel=6, mtime=0
        ) as fh:
            pickle.dump(payload, fh, protocol=4)


def load_snapshot(path: str | Path) -> Dataset:
    with gzip.open(path, "rb") as fh:
        payload = pickle.load(fh)
    cfg = DatasetConfig(*payload["config"])
    pois = {
        pid: Poi(pid, lat, lon, date.fromisoformat(ins), n, r, tuple(cats), rating)
        for pid, lat, lon, ins, n, r, cats, rating in payload["pois"]
    }
    checkins = []
    for user, poi, ts in payload["checkins"]:
        dt = datetime.fromisoformat(ts)
        tc = time_category(dt)
        checkins.append(Checkin(user, poi, dt, tc.hourly, tc.weekly))
    by_user: dict[str, list[Checkin]] = {vid: [] for vid, _ in payload["visitors"]}
    for c in checkins:
        by_user[c.user].append(c)
    visitors = {
        vid: Visitor(vid, dict(demogs), tuple(by_user[vid]))
        for vid, demogs in payload["visitors"]
    }
    mean_rating = (
        sum(p.rating for p in pois.values()) / len(pois) if pois else cfg.default_rating
    )
    stats = _compute_stats(pois, mean_rating)
    return Dataset(pois, visitors, tuple(checkins), stats, dict(payload["bucket_bounds"]), cfg)


# ---------------------------------------------------------------------------
# Parsing helpers


def _rows(source, label: str) -> Iterator[tuple[int, dict, str]]:
    if isinstance(source, (str, Path)):
        src = str(source)
        with open(source, "r", encoding="utf-8") as fh:
            for i, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise IngestError(src, i, f"invalid JSON: {exc.msg}") from exc
                yield i, row, src
    else:
        for i, row in enumerate(source, start=1):
            if not isinstance(row, dict):
                raise IngestError(label, i, "row is not an object")
            yield i, row, label


def _parse_poi(row: dict, src: str, line: int) -> Poi:
    try:
        pid = str(row["id"])
        lat = float(row["lat"])
        lon = float(row["lon"])
        inserted = date.fromisoformat(str(row["inserted"])[:10])
        total = int(row.get("checkins", 0))
        radius = float(row.get("radius_m", 0.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise IngestError(src, line, f"bad POI row: {exc}") from exc
    if not -90.0 <= lat <= 90.0:
        raise IngestError(src, line, f"latitude out of range: {lat}")
    if not -180.0 <= lon <= 180.0:
        raise IngestError(src, line, f"longitude out of range: {lon}")
    if total < 0 or radius < 0:
        raise IngestError(src, line, "negative check-in count or radius")
    cats = row.get("categories") or [UNCATEGORIZED]
    categories = tuple(sorted({str(c) for c in cats})) or (UNCATEGORIZED,)
    rating = row.get("rating")
    if rating is None:
        rating_val = -1.0  # filled with the dataset mean after the first pass
    else:
        rating_val = float(rating)
        if not 0.0 <= rating_val <= 5.0:
            raise IngestError(src, line, f"rating out of range: {rating_val}")
    return Poi(pid, lat, lon, inserted, total, radius, categories, rating_val)


def _parse_visitor(row: dict, src: str, line: int) -> tuple[str, dict[str, float]]:
    try:
        vid = str(row["id"])
        raw = row.get("demogs", {})
        demogs = {attr: float(raw.get(attr, 0.0)) for attr in DEMOG_ATTRIBUTES}
    except (KeyError, TypeError, ValueError) as exc:
        raise IngestError(src, line, f"bad visitor row: {exc}") from exc
    return vid, demogs


def _parse_checkin(row: dict, src: str, line: int, cfg: DatasetConfig) -> Checkin:
    try:
        user = str(row["user"])
        poi = str(row["poi"])
        ts = _parse_ts(str(row["ts"]), cfg)
    except (KeyError, TypeError, ValueError) as exc:
        raise IngestError(src, line, f"bad check-in row: {exc}") from exc
    tc = time_category(ts)
    return Checkin(user, poi, ts, tc.hourly, tc.weekly)


def _parse_ts(value: str, cfg: DatasetConfig) -> datetime:
    # Gowalla-style exports are naive local time; aware stamps are shifted to
    # the configured fixed offset and then treated as local.
    if value.endswith("Z"):
        value = value[:-1] + "+00:00"
    dt = datetime.fromisoformat(value)
    if dt.tzinfo is not None:
        dt = dt.astimezone(timezone(timedelta(hours=cfg.utc_offset_hours)))
        dt = dt.replace(tzinfo=None)
    return dt


# ---------------------------------------------------------------------------
# Derived statistics


def _compute_stats(pois: dict[str, Poi], mean_rating: float) -> DatasetStats:
    if not pois:
        return DatasetStats(0, 0.0, date(1970, 1, 1), mean_rating, 0.0, ())
    cats: set[str] = set()
    for p in pois.values():
        cats.update(p.categories)
    return DatasetStats(
        max_poi_checkins=max(p.total_checkins for p in pois.values()),
        max_radius_m=max(p.radius_m for p in pois.values()),
        oldest_insertion_date=min(p.inserted for p in pois.values()),
        mean_rating=mean_rating,
        city_area_m2=_bbox_area_m2([(p.lat, p.lon) for p in pois.values()]),
        category_universe=tuple(sorted(cats)),
    )


def _bbox_area_m2(points: list[tuple[float, float]]) -> float:
    """Axis-aligned bounding-box area under an equirectangular projection.

    Each side is floored at 1 m once two distinct locations exist, so the
    area stays positive even for degenerate (collinear) layouts.
    """
    distinct = set(points)
    if len(distinct) < 2:
        return 0.0
    lats = [p[0] for p in points]
    lons = [p[1] for p in points]
    mean_lat = math.radians(sum(lats) / len(lats))
    height = math.radians(max(lats) - min(lats)) * EARTH_RADIUS_M
    width = math.radians(max(lons) - min(lons)) * EARTH_RADIUS_M * math.cos(mean_lat)
    return max(height, 1.0) * max(width, 1.0)


def _refit_bucket_bounds(visitors: dict[str, Visitor]) -> dict[str, tuple[float, float, float]]:
    """Equal-frequency quartile boundaries recomputed from the loaded visitors."""
    import numpy as np

    bounds = {}
    for attr in DEMOG_ATTRIBUTES:
        values = np.array([v.demogs.get(attr, 0.0) for v in visitors.values()])
        if values.size == 0:
            bounds[attr] = DEFAULT_BUCKET_BOUNDS[attr]
            continue
        q1, q2, q3 = np.percentile(values, [25, 50, 75])
        bounds[attr] = (float(q1), float(q2), float(q3))
    return bounds


def _build_item_dictionary(dataset: Dataset) -> ItemDictionary:
    payloads: list[Payload] = []
    for attr in DEMOG_ATTRIBUTES:
        for bucket in BUCKET_NAMES:
            payloads.append(("demog", attr, bucket))
    for pid in dataset.pois:
        payloads.append(("poi", pid))
    for cat in dataset.stats.category_universe:
        payloads.append(("cat", cat))
        for h in HOURLY_BUCKETS:
            payloads.append(("cat_hour", cat, h))
        for w in WEEKLY_BUCKETS:
            payloads.append(("cat_week", cat, w))
    return ItemDictionary(payloads)
