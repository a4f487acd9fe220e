"""The eight POI-set utility functions, each mapping a set of POIs to [0, 1].

Normalizers come from dataset-level statistics; the empty set scores 0 for
every kind by convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from datetime import date
from typing import Iterable, Sequence

from .dataset import DatasetStats, Poi
from .geo import project_m

UTILITY_KINDS = (
    "popularity",
    "prestige",
    "recency",
    "coverage",
    "surprisingness",
    "category",
    "diversity",
    "size",
)


@dataclass(frozen=True)
class UtilityEnv:
    """Cross-cutting inputs: normalization stats, portfolio and mindset context."""

    stats: DatasetStats
    portfolio_categories: frozenset[str] = frozenset()
    categories_of_interest: frozenset[str] = frozenset()
    now: date = date(2010, 12, 31)

    def with_interest(self, categories: frozenset[str]) -> "UtilityEnv":
        return replace(self, categories_of_interest=categories)


def jaccard_similarity(a: Iterable, b: Iterable) -> float:
    """|A∩B| / |A∪B|; two empty sets count as identical (similarity 1)."""
    sa, sb = set(a), set(b)
    union = sa | sb
    if not union:
        return 1.0
    return len(sa & sb) / len(union)


def jaccard_distance(a: Iterable, b: Iterable) -> float:
    return 1.0 - jaccard_similarity(a, b)


def categories_of(pois: Iterable[Poi]) -> frozenset[str]:
    out: set[str] = set()
    for p in pois:
        out.update(p.categories)
    return frozenset(out)


def convex_hull_area(points: Sequence[tuple[float, float]]) -> float:
    """Convex hull area in m² of lat/lon points (equirectangular projection).

    Returns 0 for fewer than three non-collinear points.
    """
    distinct = sorted(set(points))
    if len(distinct) < 3:
        return 0.0
    ref_lat = sum(p[0] for p in distinct) / len(distinct)
    xy = [project_m(lat, lon, ref_lat) for lat, lon in distinct]
    hull = _monotone_chain(xy)
    if len(hull) < 3:
        return 0.0
    return _shoelace(hull)


def _monotone_chain(xy: list[tuple[float, float]]) -> list[tuple[float, float]]:
    pts = sorted(xy)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _shoelace(poly: list[tuple[float, float]]) -> float:
    area = 0.0
    for i, (x1, y1) in enumerate(poly):
        x2, y2 = poly[(i + 1) % len(poly)]
        area += x1 * y2 - x2 * y1
    return abs(area) / 2.0


def evaluate(kind: str, pois: Sequence[Poi], env: UtilityEnv) -> float:
    """Evaluate one utility kind on a POI set.  Always in [0, 1]."""
    if kind not in UTILITY_KINDS:
        raise ValueError(f"unknown utility kind: {kind!r}")
    P = list(pois)
    if not P:
        return 0.0
    if kind == "popularity":
        if env.stats.max_poi_checkins <= 0:
            return 0.0
        return _mean(p.total_checkins for p in P) / env.stats.max_poi_checkins
    if kind == "prestige":
        return _mean(p.rating for p in P) / 5.0
    if kind == "recency":
        mean_ord = _mean(p.inserted.toordinal() for p in P)
        delta_years = max(0.0, (env.now.toordinal() - mean_ord) / 365.0)
        return 1.0 / (1.0 + delta_years)
    if kind == "coverage":
        if env.stats.city_area_m2 <= 0:
            return 0.0
        area = convex_hull_area([(p.lat, p.lon) for p in P])
        return min(1.0, area / env.stats.city_area_m2)
    if kind == "surprisingness":
        if not env.portfolio_categories:
            return 1.0
        return jaccard_distance(categories_of(P), env.portfolio_categories)
    if kind == "category":
        return jaccard_similarity(env.categories_of_interest, categories_of(P))
    if kind == "diversity":
        if len(P) < 2:
            return 0.0
        total, pairs = 0.0, 0
        for i in range(len(P)):
            for j in range(i + 1, len(P)):
                total += jaccard_distance(P[i].categories, P[j].categories)
                pairs += 1
        return total / pairs
    # size
    if env.stats.max_radius_m <= 0:
        return 0.0
    return _mean(p.radius_m for p in P) / env.stats.max_radius_m


def evaluate_all(pois: Sequence[Poi], env: UtilityEnv) -> dict[str, float]:
    return {kind: evaluate(kind, pois, env) for kind in UTILITY_KINDS}


def _mean(values: Iterable[float]) -> float:
    vals = list(values)
    return math.fsum(vals) / len(vals)
