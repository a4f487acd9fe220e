"""Spatial queries over the POI set: radius filtering and time-matched check-ins.

A uniform lat/lon grid keeps radius queries near-constant at default radii;
results always equal a brute-force haversine scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime

from .dataset import Checkin, Dataset, EARTH_RADIUS_M, Poi, TimeCategory, time_category


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float


@dataclass(frozen=True)
class Context:
    """Where and when a session happens; wall_time is kept for simulation."""

    loc: GeoPoint
    time: TimeCategory
    wall_time: datetime

    @classmethod
    def at(cls, lat: float, lon: float, wall_time: datetime) -> "Context":
        return cls(GeoPoint(lat, lon), time_category(wall_time), wall_time)


def distance(a: GeoPoint, b: GeoPoint) -> float:
    """Haversine great-circle distance in meters."""
    lat1, lon1 = math.radians(a.lat), math.radians(a.lon)
    lat2, lon2 = math.radians(b.lat), math.radians(b.lon)
    s = (
        math.sin((lat2 - lat1) / 2) ** 2
        + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2
    )
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(s)))


def project_m(lat: float, lon: float, ref_lat: float) -> tuple[float, float]:
    """Equirectangular projection to meters at a reference latitude."""
    x = math.radians(lon) * EARTH_RADIUS_M * math.cos(math.radians(ref_lat))
    y = math.radians(lat) * EARTH_RADIUS_M
    return x, y


class GeoIndex:
    """Uniform lat/lon grid over the dataset's POIs.

    Cell size defaults to the engine's default radius so a query touches a
    handful of cells; correctness never depends on the cell size.
    """

    def __init__(self, dataset: Dataset, cell_m: float = 500.0):
        self.dataset = dataset
        self.cell_m = cell_m
        self._dlat = math.degrees(cell_m / EARTH_RADIUS_M)
        pois = list(dataset.pois.values())
        mean_lat = sum(p.lat for p in pois) / len(pois) if pois else 0.0
        cos_lat = max(0.01, math.cos(math.radians(mean_lat)))
        self._dlon = math.degrees(cell_m / (EARTH_RADIUS_M * cos_lat))
        self._cells: dict[tuple[int, int], list[Poi]] = {}
        for p in pois:
            self._cells.setdefault(self._cell_of(p.lat, p.lon), []).append(p)

    def _cell_of(self, lat: float, lon: float) -> tuple[int, int]:
        return (int(math.floor(lat / self._dlat)), int(math.floor(lon / self._dlon)))

    def query(self, center: GeoPoint, r: float) -> list[Poi]:
        """POIs within r meters of center, ordered by id."""
        if r <= 0:
            raise ValueError("radius must be positive")
        ci, cj = self._cell_of(center.lat, center.lon)
        span_i = int(math.ceil(r / self.cell_m)) + 1
        # cell width in meters shrinks with the query latitude
        cell_w = math.radians(self._dlon) * EARTH_RADIUS_M * max(
            0.01, math.cos(math.radians(center.lat))
        )
        span_j = int(math.ceil(r / cell_w)) + 1
        hits = []
        for i in range(ci - span_i, ci + span_i + 1):
            for j in range(cj - span_j, cj + span_j + 1):
                for p in self._cells.get((i, j), ()):
                    if distance(GeoPoint(p.lat, p.lon), center) <= r:
                        hits.append(p)
        hits.sort(key=lambda p: p.id)
        return hits


def nearby_pois(dataset: Dataset, center: GeoPoint, r: float,
                index: GeoIndex | None = None) -> list[Poi]:
    """All POIs within r meters of center (grid index when given, else a scan)."""
    if r <= 0:
        raise ValueError("radius must be positive")
    if index is not None:
        return index.query(center, r)
    hits = [
        p for p in dataset.pois.values()
        if distance(GeoPoint(p.lat, p.lon), center) <= r
    ]
    hits.sort(key=lambda p: p.id)
    return hits


def checkins_of(dataset: Dataset, pois: list[Poi], hourly: str,
                weekly: str | None = None) -> list[Checkin]:
    """Check-ins at the given POIs whose hourly bucket matches the context.

    Weekly matching is off by default; pass a weekly bucket to also require it.
    """
    out: list[Checkin] = []
    for p in pois:
        for c in dataset.checkins_by_poi.get(p.id, ()):
            if c.hourly != hourly:
                continue
            if weekly is not None and c.weekly != weekly:
                continue
            out.append(c)
    return out
