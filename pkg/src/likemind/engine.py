"""The recommendation engine: per-iteration pipeline, greedy mindset
maximization under a budget, and session state (portfolio, weights, history).

One iteration runs radius filtering, time-matched check-in retrieval,
transaction building, closed-itemset group mining, budgeted hill climbing on
the mindset objective, and display-POI selection.
"""

from __future__ import annotations

import secrets
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import mindsets as mindsets_mod
from .dataset import Dataset, Poi
from .geo import Context, GeoIndex, checkins_of, nearby_pois
from .groups import (
    Group,
    GroupDescription,
    build_transactions,
    describe,
    mine_groups,
    relevance,
    top_pois,
)
from .mindsets import Mindset, WeightVector, update_weights
from .utilities import UtilityEnv, categories_of


class EngineError(Exception):
    pass


class UnknownPoiError(EngineError):
    pass


class NotDisplayedError(EngineError):
    """Bookmarks are restricted to POIs shown in the latest recommendation."""


@dataclass(frozen=True)
class EngineParams:
    r: float = 500.0
    k: int = 5
    k_prime: int = 5
    sigma: float = 0.01
    tl_ms: float | None = 100.0  # wall-clock budget for the swap loop
    max_swaps: int | None = None  # deterministic budget; overrides tl_ms when set
    min_support: int = 2
    max_itemset_len: int | None = 10
    transaction_cap: int | None = 20_000
    near_dup_jaccard: float | None = 0.9  # None disables seed de-duplication
    match_weekly: bool = False

    def __post_init__(self):
        if self.r <= 0:
            raise ValueError("r must be positive")
        if self.k < 1 or self.k_prime < 1:
            raise ValueError("k and k' must be at least 1")
        if not 0.0 <= self.sigma <= 1.0:
            raise ValueError("sigma must be in [0,1]")


@dataclass
class IterationRecord:
    index: int
    mindset_label: str
    params: dict
    objective: float
    relaxed: bool
    group_summaries: list[dict]
    displayed_poi_ids: list[str]
    stage_ms: dict[str, float]
    timestamp: float

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "mindset": self.mindset_label,
            "params": self.params,
            "objective": self.objective,
            "relevance_relaxed": self.relaxed,
            "groups": self.group_summaries,
            "displayed_poi_ids": self.displayed_poi_ids,
            "stage_ms": self.stage_ms,
            "timestamp": self.timestamp,
        }


@dataclass
class Session:
    id: str
    context: Context
    portfolio: list[Poi] = field(default_factory=list)
    weights: WeightVector = mindsets_mod.INITIAL_WEIGHTS
    history: list[IterationRecord] = field(default_factory=list)
    active_mindset: Mindset | None = None
    masked_visitors: frozenset[str] = frozenset()
    last_displayed: set[str] = field(default_factory=set)
    # substrate memo: the context never changes within a session, so the
    # radius/time/mining stages are recomputed only when params change
    _substrate: tuple | None = field(default=None, repr=False)

    @property
    def portfolio_ids(self) -> list[str]:
        return [p.id for p in self.portfolio]


@dataclass
class Recommendation:
    groups: list[Group]
    scores: list[float]
    relevances: list[float]
    explanations: list[GroupDescription]
    objective: float
    relaxed: bool
    diagnostic: str | None
    iteration: int
    stage_ms: dict[str, float]

    @property
    def displayed_poi_ids(self) -> list[str]:
        seen: list[str] = []
        for g in self.groups:
            for p in g.display_pois:
                if p.id not in seen:
                    seen.append(p.id)
        return seen


@dataclass
class MaximizeResult:
    groups: list[Group]
    scores: list[float]
    objective: float
    relaxed: bool
    evaluations: int
    accepted_objectives: list[float]


def _member_jaccard(a: Group, b: Group) -> float:
    # tids index the same transaction list within one mining run, so they
    # stand in for member sets
    sa, sb = set(a.tids), set(b.tids)
    union = sa | sb
    if not union:
        return 1.0
    return len(sa & sb) / len(union)


def maximize(
    candidates: Sequence[Group],
    portfolio_ids: Sequence[str],
    sigma: float,
    k: int,
    score_of: Callable[[Group], float],
    tl_ms: float | None = 100.0,
    max_swaps: int | None = None,
    near_dup_jaccard: float | None = 0.9,
) -> MaximizeResult:
    """Pick k groups maximizing the summed mindset score by hill climbing.

    Irrelevant groups (relevance below sigma) are pruned first; when nothing
    survives, the k largest-support candidates are returned with the relaxed
    flag instead.  Survivors are scanned in support order: the top k seed the
    working set (skipping near-duplicate member sets when configured), then
    each unseen candidate is proposed as a swap against the current members,
    accepting the first strict improvement of the summed score.  Passes repeat
    until a full pass accepts nothing or the budget runs out.
    """
    portfolio = list(portfolio_ids)
    relevant = [g for g in candidates if relevance(g, portfolio) >= sigma]
    relaxed = False
    if not relevant:
        if not candidates:
            return MaximizeResult([], [], 0.0, False, 0, [])
        relaxed = True
        ordered = sorted(candidates, key=lambda g: g.sort_key)
        chosen = ordered[:k]
        return _finalize(chosen, score_of, relaxed, 0, [])

    ordered = sorted(relevant, key=lambda g: g.sort_key)
    seeds: list[Group] = []
    skipped: list[Group] = []
    for g in ordered:
        if len(seeds) == k:
            break
        if near_dup_jaccard is not None and any(
            _member_jaccard(g, s) > near_dup_jaccard for s in seeds
        ):
            skipped.append(g)
            continue
        seeds.append(g)
    # de-duplication is a preference: backfill so k groups return when possible
    for g in skipped:
        if len(seeds) == k:
            break
        seeds.append(g)

    current = list(seeds)
    current_sum = sum(score_of(g) for g in current)
    start = time.perf_counter()
    evaluations = 0
    accepted: list[float] = []

    def budget_left() -> bool:
        if max_swaps is not None:
            return evaluations < max_swaps
        if tl_ms is not None:
            return (time.perf_counter() - start) * 1000.0 < tl_ms
        return True

    improved = True
    while improved and budget_left():
        improved = False
        in_set = {id(g) for g in current}
        for g_out in ordered:
            if id(g_out) in in_set:
                continue
            if not budget_left():
                break
            s_out = score_of(g_out)
            for pos, g_in in enumerate(current):
                if not budget_left():
                    break
                evaluations += 1
                candidate_sum = current_sum - score_of(g_in) + s_out
                if candidate_sum > current_sum:
                    current[pos] = g_out
                    current_sum = candidate_sum
                    accepted.append(candidate_sum)
                    improved = True
                    break

    return _finalize(current, score_of, relaxed, evaluations, accepted)


def _finalize(
    chosen: list[Group],
    score_of: Callable[[Group], float],
    relaxed: bool,
    evaluations: int,
    accepted: list[float],
) -> MaximizeResult:
    scored = [(score_of(g), g) for g in chosen]
    scored.sort(key=lambda sg: (-sg[0], sg[1].sort_key))
    groups = [g for _, g in scored]
    scores = [s for s, _ in scored]
    return MaximizeResult(groups, scores, sum(scores), relaxed, evaluations, accepted)


class Engine:
    """Serves iterations and bookmarks over one immutable dataset."""

    def __init__(
        self,
        dataset: Dataset,
        defaults: EngineParams | None = None,
        clock: Callable[[], float] = time.time,
    ):
        self.dataset = dataset
        self.defaults = defaults or EngineParams()
        self.index = GeoIndex(dataset, cell_m=self.defaults.r) if dataset.pois else None
        self.clock = clock

    def new_session(
        self,
        context: Context,
        masked_visitors: frozenset[str] = frozenset(),
        session_id: str | None = None,
    ) -> Session:
        return Session(
            id=session_id or secrets.token_urlsafe(16),
            context=context,
            masked_visitors=masked_visitors,
        )

    def env_for(self, session: Session, now=None) -> UtilityEnv:
        interest = (
            session.active_mindset.categories_of_interest
            if session.active_mindset
            else frozenset()
        )
        return UtilityEnv(
            stats=self.dataset.stats,
            portfolio_categories=categories_of(session.portfolio),
            categories_of_interest=interest,
            now=now or session.context.wall_time.date(),
        )

    def iterate(
        self,
        session: Session,
        mindset: Mindset,
        params: EngineParams | None = None,
    ) -> Recommendation:
        """Run one full recommendation iteration and record it in the session."""
        p = params or self.defaults
        ctx = session.context
        session.active_mindset = mindset

        substrate_key = (
            p.r, p.match_weekly, p.min_support, p.max_itemset_len,
            p.transaction_cap, p.k_prime,
        )
        t0 = time.perf_counter()
        if session._substrate is not None and session._substrate[0] == substrate_key:
            _, pois, checkins, candidates = session._substrate
            t1 = t2 = t3 = time.perf_counter()
        else:
            pois = nearby_pois(self.dataset, ctx.loc, p.r, self.index)
            t1 = time.perf_counter()
            weekly = ctx.time.weekly if p.match_weekly else None
            checkins = checkins_of(self.dataset, pois, ctx.time.hourly, weekly)
            t2 = time.perf_counter()
            transactions = build_transactions(
                self.dataset, checkins, exclude=session.masked_visitors
            )
            candidates = mine_groups(
                self.dataset,
                transactions,
                min_support=p.min_support,
                max_itemset_len=p.max_itemset_len,
                transaction_cap=p.transaction_cap,
            )
            t3 = time.perf_counter()
            session._substrate = (substrate_key, pois, checkins, candidates)

        diagnostic = None
        if not pois:
            diagnostic = "no POIs within the radius; widen it"
        elif not candidates:
            diagnostic = "no look-alike groups at this radius and time; widen the radius"

        env = self.env_for(session)
        # user weights are mindset-scoped: the category weight reflects how
        # the portfolio relates to the categories of the mindset being scored
        scoring_weights = update_weights(
            session.portfolio, env.with_interest(mindset.categories_of_interest)
        )
        member_pois: dict[str, set[str]] = {}
        for c in checkins:
            if c.user in session.masked_visitors:
                continue
            member_pois.setdefault(c.user, set()).add(c.poi)
        member_pois_t = {u: tuple(sorted(s)) for u, s in member_pois.items()}

        score_cache: dict[int, float] = {}

        def score_of(g: Group) -> float:
            s = score_cache.get(id(g))
            if s is None:
                if not g.display_pois:
                    top_pois(g, p.k_prime, checkins, self.dataset, member_pois_t)
                s = mindsets_mod.score(mindset, g.display_pois, scoring_weights, env)
                score_cache[id(g)] = s
            return s

        result = maximize(
            candidates,
            session.portfolio_ids,
            p.sigma,
            p.k,
            score_of,
            tl_ms=p.tl_ms,
            max_swaps=p.max_swaps,
            near_dup_jaccard=p.near_dup_jaccard,
        )
        relevances = [relevance(g, session.portfolio_ids) for g in result.groups]
        explanations = [describe(g, self.dataset) for g in result.groups]
        t4 = time.perf_counter()

        stage_ms = {
            "nearby_pois": (t1 - t0) * 1000.0,
            "checkins_of": (t2 - t1) * 1000.0,
            "mine_groups": (t3 - t2) * 1000.0,
            "maximize": (t4 - t3) * 1000.0,
        }
        rec = Recommendation(
            groups=result.groups,
            scores=result.scores,
            relevances=relevances,
            explanations=explanations,
            objective=result.objective,
            relaxed=result.relaxed,
            diagnostic=diagnostic,
            iteration=len(session.history) + 1,
            stage_ms=stage_ms,
        )
        session.last_displayed = set(rec.displayed_poi_ids)
        session.history.append(
            IterationRecord(
                index=rec.iteration,
                mindset_label=mindset.label,
                params={
                    "r": p.r, "k": p.k, "k_prime": p.k_prime, "sigma": p.sigma,
                    "tl_ms": p.tl_ms, "max_swaps": p.max_swaps,
                },
                objective=rec.objective,
                relaxed=rec.relaxed,
                group_summaries=[
                    {
                        "support": g.support,
                        "members": len(g.members),
                        "score": s,
                        "relevance": r_,
                        "pois": [poi.id for poi in g.display_pois],
                    }
                    for g, s, r_ in zip(result.groups, result.scores, relevances)
                ],
                displayed_poi_ids=rec.displayed_poi_ids,
                stage_ms=stage_ms,
                timestamp=self.clock(),
            )
        )
        return rec

    def bookmark(self, session: Session, poi_id: str) -> Session:
        """Add a displayed POI to the portfolio and refresh the user weights."""
        poi = self.dataset.pois.get(poi_id)
        if poi is None:
            raise UnknownPoiError(f"unknown POI id: {poi_id!r}")
        if poi_id not in session.last_displayed:
            raise NotDisplayedError(
                f"POI {poi_id!r} was not part of the latest recommendation"
            )
        if poi_id in session.portfolio_ids:
            return session  # idempotent
        session.portfolio.append(poi)
        session.weights = update_weights(session.portfolio, self.env_for(session))
        return session
