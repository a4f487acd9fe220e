"""LikeMind: interactive, explainable POI recommendations from look-alike
visitor groups mined on the fly in public check-in data."""

from .dataset import (
    Dataset,
    DatasetConfig,
    DatasetStats,
    Poi,
    Visitor,
    discretize,
    load_dataset,
    load_snapshot,
    save_snapshot,
    time_category,
)
from .engine import Engine, EngineParams, Recommendation, Session
from .geo import Context, GeoPoint, distance, nearby_pois
from .mindsets import Mindset, builtin_mindsets, combine, create_from_pois, score
from .simulator import SimulationConfig, simulate

__version__ = "0.1.0"

__all__ = [
    "Context",
    "Dataset",
    "DatasetConfig",
    "DatasetStats",
    "Engine",
    "EngineParams",
    "GeoPoint",
    "Mindset",
    "Poi",
    "Recommendation",
    "Session",
    "SimulationConfig",
    "Visitor",
    "builtin_mindsets",
    "combine",
    "create_from_pois",
    "discretize",
    "distance",
    "load_dataset",
    "load_snapshot",
    "nearby_pois",
    "save_snapshot",
    "score",
    "simulate",
    "time_category",
]
