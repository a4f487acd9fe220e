"""Mindsets: labeled intents scored as prior-weighted blends of the POI-set utilities.

Seven built-ins ship with the package; new mindsets can be derived from a POI
set or by averaging existing ones.  User-specific weights start at 1.0 and are
re-derived from the session portfolio after every bookmark.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Sequence

from .dataset import Poi
from .utilities import UTILITY_KINDS, UtilityEnv, categories_of, evaluate

WeightVector = tuple[float, float, float, float, float, float, float, float]

INITIAL_WEIGHTS: WeightVector = (1.0,) * 8


@dataclass(frozen=True)
class Mindset:
    label: str
    priors: tuple[float, ...]  # aligned with UTILITY_KINDS
    categories_of_interest: frozenset[str] = frozenset()

    def prior(self, kind: str) -> float:
        return self.priors[UTILITY_KINDS.index(kind)]


# priors per mindset, columns: popularity, prestige, recency, coverage,
# surprisingness, category, diversity, size
_BUILTIN_PRIORS: list[tuple[str, tuple[float, ...]]] = [
    ("I'm new here", (0.25, 0.25, 0.10, 0.15, 0.00, 0.00, 0.25, 0.00)),
    ("surprise me", (0.25, 0.20, 0.00, 0.00, 0.30, 0.00, 0.15, 0.10)),
    ("let's workout", (0.25, 0.25, 0.00, 0.10, 0.00, 0.40, 0.00, 0.00)),
    ("me time", (0.10, 0.10, 0.00, 0.10, 0.00, 0.40, 0.00, 0.30)),
    ("I'm hungry", (0.05, 0.20, 0.10, 0.15, 0.00, 0.40, 0.05, 0.05)),
    ("let's learn", (0.20, 0.20, 0.00, 0.10, 0.00, 0.40, 0.10, 0.00)),
    ("hidden gems", (0.30, 0.30, 0.15, 0.00, 0.00, 0.00, 0.00, 0.25)),
]

_BUILTIN_CATEGORIES: dict[str, tuple[str, ...]] = {
    "let's workout": (
        "sport fields", "park", "health and fitness", "bowling",
        "tennis court", "ice skating", "gym",
    ),
    "me time": ("outdoor", "food", "tea room", "bar", "coffee shop"),
    "I'm hungry": ("food", "restaurant"),
    "let's learn": (
        "museum", "art", "gallery", "library", "sculpture", "bookstore",
        "movie theater", "historical landmark", "monument",
    ),
}


def load_category_aliases(path: str | None = None) -> dict[str, list[str]]:
    """Mapping from mindset category labels to dataset category ids.

    The shipped table is the identity; deployments whose dataset uses a
    different taxonomy override it with their own file.
    """
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    ref = resources.files("likemind").joinpath("data/category_aliases.json")
    return json.loads(ref.read_text(encoding="utf-8"))


def builtin_mindsets(aliases: dict[str, list[str]] | None = None) -> list[Mindset]:
    """The seven built-in mindsets, optionally with re-mapped category ids."""
    out = []
    for label, priors in _BUILTIN_PRIORS:
        assert abs(sum(priors) - 1.0) < 1e-9, f"priors of {label!r} must sum to 1"
        cats: set[str] = set()
        for c in _BUILTIN_CATEGORIES.get(label, ()):
            if aliases and c in aliases:
                cats.update(aliases[c])
            else:
                cats.add(c)
        out.append(Mindset(label, priors, frozenset(cats)))
    return out


def catalog_by_label(aliases: dict[str, list[str]] | None = None) -> dict[str, Mindset]:
    return {m.label: m for m in builtin_mindsets(aliases)}


def score(m: Mindset, pois: Sequence[Poi], weights: WeightVector, env: UtilityEnv) -> float:
    """Weighted-prior blend of the utilities; 0 when every weighted prior vanishes."""
    env = env.with_interest(m.categories_of_interest)
    num = 0.0
    den = 0.0
    for i, kind in enumerate(UTILITY_KINDS):
        wb = weights[i] * m.priors[i]
        if wb == 0.0:
            continue
        num += wb * evaluate(kind, pois, env)
        den += wb
    if den == 0.0:
        return 0.0
    return num / den


def update_weights(portfolio: Sequence[Poi], env: UtilityEnv) -> WeightVector:
    """Re-derive user weights from the portfolio; all ones while it is empty.

    The caller supplies env.portfolio_categories = categories of the portfolio
    and env.categories_of_interest = the active mindset's categories, so the
    surprisingness weight of a non-empty portfolio is always 0 (a set has
    distance 0 to itself).
    """
    if not portfolio:
        return INITIAL_WEIGHTS
    return tuple(evaluate(kind, portfolio, env) for kind in UTILITY_KINDS)


def create_from_pois(label: str, pois: Sequence[Poi], env: UtilityEnv) -> Mindset:
    """Derive a new mindset whose priors are the utility values of a POI set."""
    if not pois:
        raise ValueError("cannot derive a mindset from an empty POI set")
    raw = [evaluate(kind, pois, env) for kind in UTILITY_KINDS]
    total = sum(raw)
    if total == 0.0:
        priors = tuple(1.0 / len(raw) for _ in raw)
    else:
        priors = tuple(v / total for v in raw)
    return Mindset(label, priors, categories_of(pois))


def combine(label: str, mindsets: Iterable[Mindset]) -> Mindset:
    """Average the priors of two or more mindsets; interests are unioned."""
    ms = list(mindsets)
    if len(ms) < 2:
        raise ValueError("combine needs at least two mindsets")
    priors = tuple(
        sum(m.priors[i] for m in ms) / len(ms) for i in range(len(UTILITY_KINDS))
    )
    cats: set[str] = set()
    for m in ms:
        cats.update(m.categories_of_interest)
    return Mindset(label, priors, frozenset(cats))


def mindset_to_json(m: Mindset) -> dict:
    return {
        "label": m.label,
        "priors": {kind: m.priors[i] for i, kind in enumerate(UTILITY_KINDS)},
        "categories": sorted(m.categories_of_interest),
    }


def mindset_from_json(obj: dict) -> Mindset:
    label = str(obj["label"])
    priors_map = obj["priors"]
    priors = tuple(float(priors_map.get(kind, 0.0)) for kind in UTILITY_KINDS)
    if any(p < 0 for p in priors):
        raise ValueError("priors must be non-negative")
    if sum(priors) <= 0:
        raise ValueError("at least one prior must be positive")
    cats = frozenset(str(c) for c in obj.get("categories", []))
    return Mindset(label, priors, cats)
