"""Independent straight-line re-implementations used as test oracles.

Everything here is deliberately naive (enumeration, direct formula
transcription, scipy hulls) and shares no code with the package internals it
checks.
"""

from __future__ import annotations

import itertools
import math


# --- set utilities ---------------------------------------------------------


def jaccard_sim(a, b) -> float:
    a, b = set(a), set(b)
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def jaccard_dist(a, b) -> float:
    return 1.0 - jaccard_sim(a, b)


# --- Table-style utility functions ----------------------------------------


def hull_area_m2(latlon_points) -> float:
    """Convex hull area via scipy on an equirectangular projection."""
    import numpy as np
    from scipy.spatial import ConvexHull, QhullError

    pts = sorted(set(latlon_points))
    if len(pts) < 3:
        return 0.0
    ref = sum(p[0] for p in pts) / len(pts)
    R = 6_371_000.0
    xy = np.array([
        (math.radians(lon) * R * math.cos(math.radians(ref)), math.radians(lat) * R)
        for lat, lon in pts
    ])
    try:
        return float(ConvexHull(xy).volume)  # 2-D: volume is the area
    except QhullError:
        return 0.0


def utility(kind, pois, stats, portfolio_categories, categories_of_interest, now):
    """Literal transcription of the eight POI-set utilities."""
    P = list(pois)
    if not P:
        return 0.0
    if kind == "popularity":
        return (sum(p.total_checkins for p in P) / len(P)) / stats.max_poi_checkins \
            if stats.max_poi_checkins > 0 else 0.0
    if kind == "prestige":
        return (sum(p.rating for p in P) / len(P)) / 5.0
    if kind == "recency":
        mean_ord = sum(p.inserted.toordinal() for p in P) / len(P)
        dy = (now.toordinal() - mean_ord) / 365.0
        return 1.0 / (1.0 + max(0.0, dy))
    if kind == "coverage":
        if stats.city_area_m2 <= 0:
            return 0.0
        return min(1.0, hull_area_m2([(p.lat, p.lon) for p in P]) / stats.city_area_m2)
    if kind == "surprisingness":
        if not portfolio_categories:
            return 1.0
        cats = set().union(*(set(p.categories) for p in P))
        return jaccard_dist(cats, portfolio_categories)
    if kind == "category":
        cats = set().union(*(set(p.categories) for p in P))
        return jaccard_sim(categories_of_interest, cats)
    if kind == "diversity":
        if len(P) < 2:
            return 0.0
        dists = [
            jaccard_dist(a.categories, b.categories)
            for a, b in itertools.combinations(P, 2)
        ]
        return sum(dists) / len(dists)
    if kind == "size":
        return (sum(p.radius_m for p in P) / len(P)) / stats.max_radius_m \
            if stats.max_radius_m > 0 else 0.0
    raise ValueError(kind)


KINDS = ("popularity", "prestige", "recency", "coverage", "surprisingness",
         "category", "diversity", "size")


def mindset_score(priors, weights, fvals):
    """Prior- and weight-blended mean of utility values."""
    num = sum(w * b * f for w, b, f in zip(weights, priors, fvals))
    den = sum(w * b for w, b in zip(weights, priors))
    return 0.0 if den == 0 else num / den


def relevance(group_poi_ids, portfolio_ids) -> float:
    portfolio = set(portfolio_ids)
    if not portfolio:
        return 1.0
    return len(portfolio & set(group_poi_ids)) / len(portfolio)


def support(transactions, itemset) -> int:
    want = set(itemset)
    return sum(1 for t in transactions if want <= set(t))


def weight_vector(portfolio, stats, categories_of_interest, now):
    """Weight update: all ones on an empty portfolio, else the utility values."""
    if not portfolio:
        return tuple(1.0 for _ in KINDS)
    cats = set().union(*(set(p.categories) for p in portfolio))
    return tuple(
        utility(kind, portfolio, stats, cats, categories_of_interest, now)
        for kind in KINDS
    )


def hr_iteration(hit_matrix, n) -> float:
    """Mean per-session share of hitting iterations among the first n."""
    return sum(sum(hits[:n]) / n for hits in hit_matrix) / len(hit_matrix)


def hr_session(hit_matrix, n) -> float:
    return sum(1 for hits in hit_matrix if any(hits[:n])) / len(hit_matrix)


def closed_itemsets(transactions, min_support=2, max_len=0):
    """Exhaustive enumeration of closed frequent itemsets."""
    items = sorted({i for t in transactions for i in t})
    out = []
    for size in range(1, len(items) + 1):
        if max_len and size > max_len:
            break
        for combo in itertools.combinations(items, size):
            cs = set(combo)
            tids = [t for t, tr in enumerate(transactions) if cs <= set(tr)]
            if len(tids) < min_support:
                continue
            closed = True
            for extra in items:
                if extra in cs:
                    continue
                if sum(1 for t in tids if extra in set(transactions[t])) == len(tids):
                    closed = False
                    break
            if closed:
                out.append((tuple(sorted(combo)), tuple(tids)))
    return sorted(out)


def haversine_m(lat1, lon1, lat2, lon2) -> float:
    """Reference great-circle distance (explicit formula transcription)."""
    R = 6_371_000.0
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = math.radians(lat2 - lat1)
    dl = math.radians(lon2 - lon1)
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * R * math.atan2(math.sqrt(a), math.sqrt(1 - a))
