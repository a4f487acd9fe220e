import random
from datetime import date, datetime

import pytest

from likemind.dataset import Dataset, DatasetConfig, Poi, load_dataset
from likemind.synth import CityConfig, generate_dataset


def make_poi(pid, lat=48.86, lon=2.34, inserted=date(2009, 6, 1), checkins=10,
             radius=50.0, categories=("food",), rating=3.5):
    return Poi(pid, lat, lon, inserted, checkins, radius, tuple(sorted(categories)), rating)


def random_poi(rnd: random.Random, pid: str, categories=("food", "bar", "museum", "park", "shopping")):
    n_cats = rnd.randint(1, 3)
    return make_poi(
        pid,
        lat=48.82 + rnd.random() * 0.08,
        lon=2.28 + rnd.random() * 0.12,
        inserted=date(2005 + rnd.randint(0, 5), 1 + rnd.randint(0, 11), 1 + rnd.randint(0, 27)),
        checkins=rnd.randint(0, 500),
        radius=rnd.random() * 400,
        categories=tuple(rnd.sample(categories, n_cats)),
        rating=round(rnd.random() * 5, 2),
    )


@pytest.fixture
def tiny_rows():
    """Three POIs, three visitors, a handful of check-ins."""
    pois = [
        {"id": "a", "lat": 48.8600, "lon": 2.3400, "inserted": "2009-01-15",
         "checkins": 10, "radius_m": 40.0, "categories": ["food"], "rating": 4.0},
        {"id": "b", "lat": 48.8610, "lon": 2.3410, "inserted": "2008-07-01",
         "checkins": 20, "radius_m": 80.0, "categories": ["museum", "art"]},
        {"id": "c", "lat": 48.8700, "lon": 2.3600, "inserted": "2010-02-02",
         "checkins": 30, "radius_m": 20.0, "categories": []},
    ]
    visitors = [
        {"id": "u1", "demogs": {"items": 1, "photos": 2, "friends": 5,
                                "check-ins": 13, "places": 4}},
        {"id": "u2", "demogs": {"items": 6, "photos": 0, "friends": 1,
                                "check-ins": 40, "places": 30}},
        {"id": "u3", "demogs": {"items": 3, "photos": 3, "friends": 4,
                                "check-ins": 2, "places": 10}},
    ]
    checkins = [
        {"user": "u1", "poi": "a", "ts": "2010-03-02T13:00:00"},  # Tue afternoon
        {"user": "u1", "poi": "b", "ts": "2010-03-02T15:30:00"},
        {"user": "u2", "poi": "a", "ts": "2010-03-06T14:10:00"},  # Sat afternoon
        {"user": "u2", "poi": "b", "ts": "2010-03-07T03:00:00"},  # Sun night
        {"user": "u3", "poi": "c", "ts": "2010-03-02T05:00:00"},  # Tue morning
    ]
    return pois, visitors, checkins


@pytest.fixture
def tiny_dataset(tiny_rows) -> Dataset:
    pois, visitors, checkins = tiny_rows
    return load_dataset(pois, visitors, checkins, DatasetConfig())


@pytest.fixture(scope="session")
def city() -> Dataset:
    """The synthetic city used by the studies (built once per test session)."""
    return generate_dataset(CityConfig(seed=7))
