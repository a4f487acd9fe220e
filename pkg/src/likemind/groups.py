"""Look-alike groups: enriched transactions, closed-itemset mining, relevance,
display POIs and human-readable descriptions."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import fim
from .dataset import Checkin, Dataset, Poi

DEFAULT_MIN_SUPPORT = 2
DEFAULT_MAX_ITEMSET_LEN = 10
DEFAULT_TRANSACTION_CAP = 20_000


class MiningCapExceeded(RuntimeError):
    """Too many transactions for on-the-fly mining; use a smaller radius."""


@dataclass(frozen=True)
class Transaction:
    visitor_id: str
    items: frozenset[int]


class Group:
    """A cohort of visitors sharing a frequent itemset.

    Member sets are materialized lazily from the mining run's transaction
    list; everything else is precomputed at mining time.
    """

    __slots__ = (
        "itemset", "tids", "support", "demog_items", "poi_items",
        "category_items", "time_items", "display_pois", "_visitor_ids",
        "_members",
    )

    def __init__(self, itemset, tids, demog_items, poi_items, category_items,
                 time_items, visitor_ids):
        self.itemset: tuple[int, ...] = itemset
        self.tids: tuple[int, ...] = tids
        self.support: int = len(tids)
        self.demog_items: tuple[int, ...] = demog_items
        self.poi_items: tuple[str, ...] = poi_items
        self.category_items: tuple[int, ...] = category_items
        self.time_items: tuple[int, ...] = time_items
        self.display_pois: list[Poi] = []
        self._visitor_ids = visitor_ids
        self._members: frozenset[str] | None = None

    @property
    def members(self) -> frozenset[str]:
        if self._members is None:
            self._members = frozenset(self._visitor_ids[t] for t in self.tids)
        return self._members

    @property
    def sort_key(self) -> tuple:
        return (-self.support, self.itemset)

    def __repr__(self):  # pragma: no cover - debugging aid
        return f"Group(itemset={self.itemset}, support={self.support})"


@dataclass(frozen=True)
class GroupDescription:
    member_count: int
    demographic_phrases: tuple[str, ...]
    category_phrases: tuple[str, ...]
    time_phrases: tuple[str, ...]
    poi_names: tuple[str, ...]
    text: str


def build_transactions(
    dataset: Dataset,
    checkins: Sequence[Checkin],
    exclude: frozenset[str] = frozenset(),
) -> list[Transaction]:
    """One enriched transaction per distinct visitor in the check-in set.

    Items: the visitor's five demographic buckets plus, per check-in, the POI,
    its categories and the category-by-time combinations.
    """
    by_user: dict[str, set[int]] = {}
    for c in checkins:
        if c.user in exclude:
            continue
        items = by_user.get(c.user)
        if items is None:
            items = set(dataset.visitor_bucket_items(dataset.visitors[c.user]))
            by_user[c.user] = items
        items.update(dataset.checkin_items(c))
    return [Transaction(vid, frozenset(by_user[vid])) for vid in sorted(by_user)]


def mine_groups(
    dataset: Dataset,
    transactions: Sequence[Transaction],
    min_support: int = DEFAULT_MIN_SUPPORT,
    max_itemset_len: int | None = DEFAULT_MAX_ITEMSET_LEN,
    transaction_cap: int | None = DEFAULT_TRANSACTION_CAP,
) -> list[Group]:
    """All closed frequent itemsets as groups, largest support first."""
    if min_support < 2:
        raise ValueError("min_support must be at least 2")
    if transaction_cap is not None and len(transactions) > transaction_cap:
        raise MiningCapExceeded(
            f"{len(transactions)} transactions exceed the safety cap "
            f"({transaction_cap}); retry with a smaller radius"
        )
    itemsets = fim.mine_closed(
        [t.items for t in transactions],
        min_support=min_support,
        max_len=max_itemset_len or 0,
    )
    visitor_ids = tuple(t.visitor_id for t in transactions)
    poi_lo, poi_hi = dataset.items.kind_range("poi")
    demog_lo, demog_hi = dataset.items.kind_range("demog")
    cat_lo, cat_hi = dataset.items.kind_range("cat")
    payload_of = dataset.items.payload_of

    groups = []
    for items, tids in itemsets:
        demog, pois, cats, times = [], [], [], []
        for item_id in items:
            if poi_lo <= item_id < poi_hi:
                pois.append(payload_of(item_id)[1])
            elif demog_lo <= item_id < demog_hi:
                demog.append(item_id)
            elif cat_lo <= item_id < cat_hi:
                cats.append(item_id)
            else:  # cat_hour / cat_week
                times.append(item_id)
        groups.append(Group(
            itemset=items,
            tids=tids,
            demog_items=tuple(demog),
            poi_items=tuple(sorted(pois)),
            category_items=tuple(cats),
            time_items=tuple(times),
            visitor_ids=visitor_ids,
        ))
    groups.sort(key=lambda g: g.sort_key)
    return groups


def relevance(group: Group, portfolio_poi_ids: Iterable[str]) -> float:
    """Share of the portfolio covered by the group's POI items; 1 on cold start."""
    portfolio = set(portfolio_poi_ids)
    if not portfolio:
        return 1.0
    return len(portfolio.intersection(group.poi_items)) / len(portfolio)


def top_pois(
    group: Group,
    k_prime: int,
    checkins: Sequence[Checkin],
    dataset: Dataset,
    member_pois: dict[str, tuple[str, ...]] | None = None,
) -> list[Poi]:
    """The group's display POIs: nearby POIs visited by the most members.

    Candidates are POIs from the (radius- and time-filtered) check-in set that
    at least one member visited; ranked by distinct-member count, then total
    check-ins, then id.  The result is cached on the group.
    """
    if k_prime < 1:
        raise ValueError("k_prime must be at least 1")
    counts: Counter[str] = Counter()
    if member_pois is not None:
        for vid in group.members:
            counts.update(member_pois.get(vid, ()))
    else:
        seen: dict[str, set[str]] = {}
        for c in checkins:
            if c.user in group.members:
                seen.setdefault(c.user, set()).add(c.poi)
        for pois in seen.values():
            counts.update(pois)
    ranked = sorted(
        counts.items(),
        key=lambda kv: (-kv[1], -dataset.pois[kv[0]].total_checkins, kv[0]),
    )
    group.display_pois = [dataset.pois[pid] for pid, _ in ranked[:k_prime]]
    return group.display_pois


_TIME_PHRASES = {
    "morning": "in the morning",
    "afternoon": "in the afternoon",
    "evening": "in the evening",
    "night": "at night",
    "weekday": "on weekdays",
    "weekend": "on weekends",
}


def _plural(category: str) -> str:
    if category.endswith(("s", "sh", "ch", "x")):
        return category + "es"
    if category.endswith("y") and category[-2:-1] not in "aeiou":
        return category[:-1] + "ies"
    return category + "s"


def describe(group: Group, dataset: Dataset) -> GroupDescription:
    """Render the itemset as a stable, faithful description of the cohort."""
    demog_phrases = []
    for item_id in group.demog_items:
        _, attr, bucket = dataset.items.payload_of(item_id)
        demog_phrases.append(f"have {bucket} {attr}")

    # merge category and category-by-time items into per-category phrases
    by_cat: dict[str, list[str]] = {}
    for item_id in group.category_items:
        _, cat = dataset.items.payload_of(item_id)
        by_cat.setdefault(cat, [])
    time_phrases = []
    for item_id in group.time_items:
        _, cat, bucket = dataset.items.payload_of(item_id)
        by_cat.setdefault(cat, []).append(_TIME_PHRASES[bucket])
        time_phrases.append(f"{_plural(cat)} {_TIME_PHRASES[bucket]}")
    category_phrases = []
    for cat in sorted(by_cat):
        qualifiers = " ".join(sorted(set(by_cat[cat])))
        category_phrases.append(f"{_plural(cat)} {qualifiers}".strip())

    clauses = []
    if demog_phrases:
        clauses.append(" and ".join(demog_phrases))
    if category_phrases:
        clauses.append("tend to visit " + " and ".join(category_phrases))
    if group.poi_items:
        clauses.append("share check-ins at " + ", ".join(group.poi_items))
    text = "visitors who " + " and ".join(clauses) if clauses else "visitors"

    return GroupDescription(
        member_count=len(group.members),
        demographic_phrases=tuple(demog_phrases),
        category_phrases=tuple(category_phrases),
        time_phrases=tuple(time_phrases),
        poi_names=group.poi_items,
        text=text,
    )
