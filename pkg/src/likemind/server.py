"""JSON-over-HTTP service exposing sessions, recommendations, bookmarks and the
mindset catalog under a versioned /v1 prefix."""

from __future__ import annotations

import itertools
import os
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .dataset import Dataset, load_snapshot
from .engine import (
    Engine,
    EngineParams,
    NotDisplayedError,
    Recommendation,
    Session,
    UnknownPoiError,
)
from .geo import Context, GeoPoint, distance
from .mindsets import Mindset, catalog_by_label, mindset_from_json, mindset_to_json


@dataclass
class ServerConfig:
    bind: str = "127.0.0.1:8080"
    dataset_path: str | None = None
    params: EngineParams = field(default_factory=EngineParams)
    session_ttl_s: float = 3600.0
    cors_origins: tuple[str, ...] = ("*",)
    # replay mode: sequential session ids and a logical clock so that
    # replaying a recorded request log reproduces responses byte-for-byte
    deterministic: bool = False

    @classmethod
    def from_env(cls) -> "ServerConfig":
        return cls(
            bind=os.environ.get("LIKEMIND_BIND", "127.0.0.1:8080"),
            dataset_path=os.environ.get("LIKEMIND_DATASET"),
        )


class CreateSessionBody(BaseModel):
    lat: float = Field(ge=-90.0, le=90.0)
    lon: float = Field(ge=-180.0, le=180.0)
    wall_time: datetime


class RecommendBody(BaseModel):
    mindset: str | dict
    overrides: dict = Field(default_factory=dict)


class BookmarkBody(BaseModel):
    poi_id: str


_OVERRIDE_KEYS = {
    "r": "r", "k": "k", "k_prime": "k_prime", "sigma": "sigma",
    "tl_ms": "tl_ms", "max_swaps": "max_swaps",
}


class SessionStore:
    """In-memory sessions with TTL eviction and per-session serialization."""

    def __init__(self, ttl_s: float, clock=time.monotonic):
        self._ttl = ttl_s
        self._clock = clock
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._touched: dict[str, float] = {}

    def put(self, session: Session) -> None:
        with self._lock:
            self._evict()
            self._sessions[session.id] = session
            self._locks[session.id] = threading.Lock()
            self._touched[session.id] = self._clock()

    def acquire(self, session_id: str) -> tuple[Session, threading.Lock]:
        with self._lock:
            self._evict()
            session = self._sessions.get(session_id)
            if session is None:
                raise KeyError(session_id)
            self._touched[session_id] = self._clock()
            return session, self._locks[session_id]

    def _evict(self) -> None:
        now = self._clock()
        stale = [sid for sid, t in self._touched.items() if now - t > self._ttl]
        for sid in stale:
            self._sessions.pop(sid, None)
            self._locks.pop(sid, None)
            self._touched.pop(sid, None)

    def snapshot(self) -> list[dict]:
        with self._lock:
            return [_session_summary(s) for s in self._sessions.values()]


def _poi_json(poi, center: GeoPoint | None = None) -> dict:
    out = {
        "id": poi.id,
        "lat": poi.lat,
        "lon": poi.lon,
        "categories": list(poi.categories),
        "rating": poi.rating,
        "total_checkins": poi.total_checkins,
        "radius_m": poi.radius_m,
        "inserted": poi.inserted.isoformat(),
    }
    if center is not None:
        out["distance_m"] = round(distance(GeoPoint(poi.lat, poi.lon), center), 1)
    return out


def _session_summary(session: Session) -> dict:
    return {
        "session_id": session.id,
        "context": {
            "lat": session.context.loc.lat,
            "lon": session.context.loc.lon,
            "wall_time": session.context.wall_time.isoformat(),
            "hourly": session.context.time.hourly,
            "weekly": session.context.time.weekly,
        },
        "portfolio": session.portfolio_ids,
        "weights": {
            kind: w for kind, w in zip(
                ("popularity", "prestige", "recency", "coverage",
                 "surprisingness", "category", "diversity", "size"),
                session.weights,
            )
        },
        "active_mindset": session.active_mindset.label if session.active_mindset else None,
        "iterations": len(session.history),
        "history": [rec.to_json() for rec in session.history],
    }


def _recommendation_json(rec: Recommendation, center: GeoPoint) -> dict:
    return {
        "iteration": rec.iteration,
        "objective": rec.objective,
        "relevance_relaxed": rec.relaxed,
        "diagnostic": rec.diagnostic,
        "groups": [
            {
                "rank": i,
                "support": g.support,
                "member_count": len(g.members),
                "score": s,
                "relevance": r,
                "description": {
                    "text": d.text,
                    "member_count": d.member_count,
                    "demographics": list(d.demographic_phrases),
                    "categories": list(d.category_phrases),
                    "times": list(d.time_phrases),
                    "pois": list(d.poi_names),
                },
                "pois": [_poi_json(p, center) for p in g.display_pois],
            }
            for i, (g, s, r, d) in enumerate(
                zip(rec.groups, rec.scores, rec.relevances, rec.explanations)
            )
        ],
        "stage_ms": rec.stage_ms,
    }


def create_app(dataset: Dataset, config: ServerConfig | None = None) -> FastAPI:
    cfg = config or ServerConfig()
    if cfg.deterministic:
        counter = itertools.count(1)
        clock = lambda: float(next(counter))  # noqa: E731 - logical clock
        id_counter = itertools.count(1)
        make_id = lambda: f"s-{next(id_counter):08d}"  # noqa: E731
    else:
        clock = time.time
        make_id = None

    engine = Engine(dataset, cfg.params, clock=clock)
    store = SessionStore(cfg.session_ttl_s)
    catalog = catalog_by_label()

    app = FastAPI(title="likemind", version="1.0")
    app.state.engine = engine
    app.state.store = store
    if cfg.cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(cfg.cors_origins),
            allow_methods=["*"],
            allow_headers=["*"],
        )

    def resolve_mindset(spec) -> Mindset:
        if isinstance(spec, str):
            m = catalog.get(spec)
            if m is None:
                raise HTTPException(
                    status_code=400,
                    detail={
                        "error": f"unknown mindset label: {spec!r}",
                        "valid_labels": sorted(catalog),
                    },
                )
            return m
        try:
            return mindset_from_json(spec)
        except (KeyError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=f"bad mindset: {exc}")

    def resolve_params(overrides: dict) -> EngineParams:
        if not overrides:
            return cfg.params
        unknown = set(overrides) - set(_OVERRIDE_KEYS)
        if unknown:
            raise HTTPException(status_code=400, detail=f"unknown overrides: {sorted(unknown)}")
        kwargs = {f: getattr(cfg.params, f) for f in EngineParams.__dataclass_fields__}
        for key, attr in _OVERRIDE_KEYS.items():
            if key in overrides:
                kwargs[attr] = overrides[key]
        try:
            return EngineParams(**kwargs)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    def get_session(session_id: str) -> tuple[Session, threading.Lock]:
        try:
            return store.acquire(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown session: {session_id}")

    @app.get("/v1/mindsets")
    def mindsets_catalog():
        return {"mindsets": [mindset_to_json(m) for m in catalog.values()]}

    @app.post("/v1/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        wall = body.wall_time.replace(tzinfo=None)
        context = Context.at(body.lat, body.lon, wall)
        session = engine.new_session(
            context, session_id=make_id() if make_id else None
        )
        store.put(session)
        return {"session_id": session.id}

    @app.get("/v1/sessions/{session_id}")
    def session_detail(session_id: str):
        session, lock = get_session(session_id)
        with lock:
            return _session_summary(session)

    @app.post("/v1/sessions/{session_id}/recommend")
    def recommend(session_id: str, body: RecommendBody):
        session, lock = get_session(session_id)
        mindset = resolve_mindset(body.mindset)
        params = resolve_params(body.overrides)
        with lock:
            rec = engine.iterate(session, mindset, params)
            return _recommendation_json(rec, session.context.loc)

    @app.post("/v1/sessions/{session_id}/bookmarks")
    def bookmark(session_id: str, body: BookmarkBody):
        session, lock = get_session(session_id)
        with lock:
            try:
                engine.bookmark(session, body.poi_id)
            except UnknownPoiError as exc:
                raise HTTPException(status_code=404, detail=str(exc))
            except NotDisplayedError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            return _session_summary(session)

    @app.get("/v1/pois/{poi_id}")
    def poi_detail(poi_id: str):
        poi = dataset.pois.get(poi_id)
        if poi is None:
            raise HTTPException(status_code=404, detail=f"unknown POI: {poi_id}")
        return _poi_json(poi)

    return app


def serve(config: ServerConfig) -> None:
    """Load the dataset snapshot and run the HTTP server (blocking)."""
    import uvicorn

    if not config.dataset_path:
        raise SystemExit("no dataset: set LIKEMIND_DATASET or pass --dataset")
    dataset = load_snapshot(config.dataset_path)
    app = create_app(dataset, config)
    host, _, port = config.bind.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
