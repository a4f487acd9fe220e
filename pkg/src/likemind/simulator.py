"""Headless simulation of interactive sessions and the Hit-Ratio study.

Each simulated session samples a visitor and one of their check-ins as the
context, masks the visitor's entire history out of the mining substrate
(cold start), then plays N iterations of mindset selection, recommendation,
group/POI selection and bookmarking.  Hits are overlaps between displayed
POIs and the visitor's held-out near-future check-ins.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dataset import Dataset, Visitor, time_category
from .engine import Engine, EngineParams, Recommendation
from .geo import Context, GeoIndex, GeoPoint, distance, nearby_pois
from .mindsets import Mindset, WeightVector, builtin_mindsets, score, update_weights
from .utilities import UtilityEnv

EVAL_WINDOW_HOURS = 48.0

GROUP_STRATEGIES = ("random", "optimal")
MINDSET_STRATEGIES = ("random", "optimal")


@dataclass(frozen=True)
class SimulationConfig:
    sessions: int = 100
    iterations: int = 10
    r: float = 500.0
    group_strategy: str = "random"
    mindset_strategy: str = "random"
    theta: float = 0.5
    seed: int = 0
    k: int = 5
    k_prime: int = 5
    sigma: float = 0.01
    max_swaps: int = 60
    min_support: int = 2
    max_itemset_len: int | None = 10
    near_dup_jaccard: float | None = 0.9

    def engine_params(self) -> EngineParams:
        return EngineParams(
            r=self.r, k=self.k, k_prime=self.k_prime, sigma=self.sigma,
            tl_ms=None, max_swaps=self.max_swaps,
            min_support=self.min_support, max_itemset_len=self.max_itemset_len,
            near_dup_jaccard=self.near_dup_jaccard,
        )


@dataclass
class IterationTrace:
    mindset_label: str
    displayed_poi_ids: tuple[str, ...]
    hit: bool
    relaxed: bool
    group_count: int
    relevances: tuple[float, ...]
    selected_group: int | None
    selected_poi: str | None
    stage_ms: dict[str, float]


@dataclass
class SessionTrace:
    user_id: str
    context: Context
    eval_pois: frozenset[str]
    iterations: list[IterationTrace] = field(default_factory=list)

    @property
    def hits(self) -> list[bool]:
        return [it.hit for it in self.iterations]


def build_eval_set(dataset: Dataset, visitor: Visitor, context: Context, r: float) -> frozenset[str]:
    """POIs the visitor checks into within the next 48 h and within the radius.

    The context POI itself (distance 0) is excluded, matching the open
    distance interval.
    """
    out: set[str] = set()
    for c in visitor.checkins:
        delta_h = (c.ts - context.wall_time).total_seconds() / 3600.0
        if not 0.0 < delta_h <= EVAL_WINDOW_HOURS:
            continue
        poi = dataset.pois[c.poi]
        d = distance(GeoPoint(poi.lat, poi.lon), context.loc)
        if 0.0 < d <= r:
            out.add(c.poi)
    return frozenset(out)


def cosine_demogs(group_demog_items: Sequence[int], visitor_items: Sequence[int]) -> float:
    """Cosine similarity of one-hot demographic bucket vectors."""
    a, b = set(group_demog_items), set(visitor_items)
    if not a or not b:
        return 0.0
    return len(a & b) / math.sqrt(len(a) * len(b))


def _restrict(rec: Recommendation, indices: Sequence[int]) -> Recommendation:
    """A shallow view of a recommendation limited to some group indices."""
    import copy

    view = copy.copy(rec)
    view.groups = [rec.groups[i] for i in indices]
    return view


def select_group(rec: Recommendation, visitor_items: Sequence[int], strategy: str,
                 rng: np.random.Generator) -> int:
    """Index of the chosen group: uniform, or maximal demographic cosine."""
    if strategy == "random":
        return int(rng.integers(len(rec.groups)))
    if strategy != "optimal":
        raise ValueError(f"unknown group strategy: {strategy!r}")
    best = 0
    best_key = None
    for i, g in enumerate(rec.groups):
        key = (cosine_demogs(g.demog_items, visitor_items), g.support)
        if best_key is None or key > best_key or (
            key == best_key and g.itemset < rec.groups[best].itemset
        ):
            best, best_key = i, key
    return best


def select_mindset(
    catalog: Sequence[Mindset],
    prev_group_pois,
    weights: WeightVector,
    theta: float,
    current: Mindset | None,
    strategy: str,
    rng: np.random.Generator,
    env: UtilityEnv,
    portfolio: Sequence | None = None,
) -> Mindset:
    """Keep the current mindset with probability theta, else sample per strategy.

    The optimal strategy scores each candidate mindset on the previous chosen
    group's POIs; with a portfolio given, user weights are re-derived per
    candidate (the category weight depends on the mindset being scored).
    """
    if current is not None and rng.random() < theta:
        return current
    if strategy == "random":
        return catalog[int(rng.integers(len(catalog)))]
    if strategy != "optimal":
        raise ValueError(f"unknown mindset strategy: {strategy!r}")
    pois = list(prev_group_pois or [])
    if not pois:
        # no signal to maximize yet: the first pick is a uniform sample
        return catalog[int(rng.integers(len(catalog)))]
    best = catalog[0]
    best_score = -1.0
    for m in catalog:
        if portfolio is not None:
            w = update_weights(portfolio, env.with_interest(m.categories_of_interest))
        else:
            w = weights
        s = score(m, pois, w, env)
        if s > best_score:
            best, best_score = m, s
    return best


def simulate(dataset: Dataset, config: SimulationConfig,
             engine: Engine | None = None) -> list[SessionTrace]:
    """Run the configured sessions; deterministic given (seed, config, dataset).

    Context sampling uses a per-session RNG stream independent from strategy
    decisions, so runs differing only in strategy see identical users,
    contexts and evaluation sets.
    """
    eng = engine or Engine(dataset, EngineParams(r=config.r))
    params = config.engine_params()
    catalog = builtin_mindsets()
    eligible = [v for v in dataset.visitors.values() if v.checkins]
    if not eligible:
        raise ValueError("dataset has no visitors with check-ins")

    children = np.random.SeedSequence(config.seed).spawn(config.sessions)
    traces: list[SessionTrace] = []
    for child in children:
        ctx_ss, pol_ss = child.spawn(2)
        ctx_rng = np.random.default_rng(ctx_ss)
        pol_rng = np.random.default_rng(pol_ss)

        visitor = eligible[int(ctx_rng.integers(len(eligible)))]
        checkin = visitor.checkins[int(ctx_rng.integers(len(visitor.checkins)))]
        poi = dataset.pois[checkin.poi]
        context = Context(
            GeoPoint(poi.lat, poi.lon), time_category(checkin.ts), checkin.ts
        )
        eval_set = build_eval_set(dataset, visitor, context, config.r)
        visitor_items = dataset.visitor_bucket_items(visitor)

        session = eng.new_session(context, masked_visitors=frozenset({visitor.id}))
        trace = SessionTrace(visitor.id, context, eval_set)
        current_mindset: Mindset | None = None
        prev_pois: list = []
        for _ in range(config.iterations):
            env = eng.env_for(session)
            mindset = select_mindset(
                catalog, prev_pois, session.weights, config.theta,
                current_mindset, config.mindset_strategy, pol_rng, env,
                portfolio=session.portfolio,
            )
            current_mindset = mindset
            rec = eng.iterate(session, mindset, params)
            displayed = tuple(rec.displayed_poi_ids)
            hit = bool(eval_set.intersection(displayed))
            selected_group = None
            selected_poi = None
            if rec.groups:
                in_portfolio = set(session.portfolio_ids)
                # a simulated user favors groups that still offer something new
                fresh = [
                    i for i, g in enumerate(rec.groups)
                    if any(p.id not in in_portfolio for p in g.display_pois)
                ]
                pool = fresh or list(range(len(rec.groups)))
                picked = select_group(
                    _restrict(rec, pool), visitor_items,
                    config.group_strategy, pol_rng,
                )
                selected_group = pool[picked]
                g_star = rec.groups[selected_group]
                prev_pois = list(g_star.display_pois)
                for p in g_star.display_pois:
                    if p.id not in in_portfolio:
                        selected_poi = p.id
                        eng.bookmark(session, p.id)
                        break
            trace.iterations.append(
                IterationTrace(
                    mindset_label=mindset.label,
                    displayed_poi_ids=displayed,
                    hit=hit,
                    relaxed=rec.relaxed,
                    group_count=len(rec.groups),
                    relevances=tuple(rec.relevances),
                    selected_group=selected_group,
                    selected_poi=selected_poi,
                    stage_ms=rec.stage_ms,
                )
            )
        traces.append(trace)
    return traces


def hr_iteration(traces: Sequence[SessionTrace], n: int) -> float:
    """Mean share of hitting iterations among the first n, across sessions."""
    _check_n(traces, n)
    return sum(sum(t.hits[:n]) / n for t in traces) / len(traces)


def hr_session(traces: Sequence[SessionTrace], n: int) -> float:
    """Share of sessions with at least one hit in the first n iterations."""
    _check_n(traces, n)
    return sum(1.0 for t in traces if any(t.hits[:n])) / len(traces)


def _check_n(traces: Sequence[SessionTrace], n: int) -> None:
    if n < 1:
        raise ValueError("n must be at least 1")
    if not traces:
        raise ValueError("no traces")
    short = min(len(t.iterations) for t in traces)
    if short < n:
        raise ValueError(f"traces have only {short} iterations, need {n}")


# ---------------------------------------------------------------------------
# Baselines


def baseline_pois(dataset: Dataset, context: Context, r: float, n: int, kind: str,
                  index: GeoIndex | None = None) -> list:
    """Static nearby POI sets: most popular, or greedily diversified."""
    near = nearby_pois(dataset, context.loc, r, index)
    if kind == "popularity":
        ranked = sorted(near, key=lambda p: (-p.total_checkins, p.id))
        return ranked[:n]
    if kind != "diversity":
        raise ValueError(f"unknown baseline kind: {kind!r}")
    if not near:
        return []
    # greedy max of the diversity utility, seeded by the most popular POI
    seed = min(near, key=lambda p: (-p.total_checkins, p.id))
    chosen = [seed]
    remaining = {p.id: p for p in near if p.id != seed.id}
    cum = {pid: 0.0 for pid in remaining}

    def jd(a, b):
        sa, sb = set(a.categories), set(b.categories)
        union = sa | sb
        return 0.0 if not union else 1.0 - len(sa & sb) / len(union)

    for pid in cum:
        cum[pid] = jd(remaining[pid], seed)
    pair_sum = 0.0
    while len(chosen) < n and remaining:
        m = len(chosen)
        denom = (m + 1) * m / 2
        best_id = min(
            remaining, key=lambda pid: (-(pair_sum + cum[pid]) / denom, pid)
        )
        best = remaining.pop(best_id)
        pair_sum += cum.pop(best_id)
        for pid in cum:
            cum[pid] += jd(remaining[pid], best)
        chosen.append(best)
    return chosen


def baseline_traces(dataset: Dataset, traces: Sequence[SessionTrace], config: SimulationConfig,
                    kind: str, engine: Engine | None = None) -> list[SessionTrace]:
    """Replay the sampled sessions against a static baseline of k*k' POIs."""
    index = engine.index if engine else None
    n = config.k * config.k_prime
    out = []
    for t in traces:
        pois = baseline_pois(dataset, t.context, config.r, n, kind, index)
        ids = tuple(p.id for p in pois)
        hit = bool(t.eval_pois.intersection(ids))
        bt = SessionTrace(t.user_id, t.context, t.eval_pois)
        bt.iterations = [
            IterationTrace(kind, ids, hit, False, 0, (), None, None, {})
            for _ in t.iterations
        ]
        out.append(bt)
    return out


# ---------------------------------------------------------------------------
# Reporting


REPORT_COLUMNS = (
    "variant", "N", "HR_I", "HR_S",
    "group_strategy", "mindset_strategy", "theta", "seed",
)


def report_rows(traces: Sequence[SessionTrace], config: SimulationConfig,
                ns: Sequence[int] | None = None, variant: str = "engine") -> list[dict]:
    ns = list(ns) if ns is not None else list(range(1, config.iterations + 1))
    rows = []
    for n in ns:
        rows.append({
            "variant": variant,
            "N": n,
            "HR_I": f"{hr_iteration(traces, n):.6f}",
            "HR_S": f"{hr_session(traces, n):.6f}",
            "group_strategy": config.group_strategy,
            "mindset_strategy": config.mindset_strategy,
            "theta": f"{config.theta:.3f}",
            "seed": config.seed,
        })
    return rows


def write_report(rows: Sequence[dict], path=None) -> str:
    """Serialize report rows as CSV; byte-identical for identical rows."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text
