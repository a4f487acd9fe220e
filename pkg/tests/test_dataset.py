import random
from datetime import datetime

import pytest

from likemind.dataset import (
    DEMOG_ATTRIBUTES,
    DatasetConfig,
    IngestError,
    discretize,
    load_dataset,
    load_snapshot,
    save_snapshot,
    time_category,
)


def test_degenerate_load():
    pois = [{"id": "p", "lat": 1.0, "lon": 2.0, "inserted": "2009-01-01",
             "checkins": 5, "radius_m": 10.0, "categories": ["x"], "rating": 3.0}]
    visitors = [{"id": "u", "demogs": {"items": 1, "photos": 1, "friends": 1,
                                       "check-ins": 1, "places": 1}}]
    ds = load_dataset(pois, visitors, [], DatasetConfig())
    assert len(ds.checkins) == 0
    assert ds.stats.max_poi_checkins == 5
    assert ds.stats.max_radius_m == 10.0


def test_missing_categories_default(tiny_dataset):
    assert tiny_dataset.pois["c"].categories == ("uncategorized",)


def test_max_checkins_over_rows(tiny_dataset):
    assert tiny_dataset.stats.max_poi_checkins == 30


def test_missing_rating_gets_dataset_mean(tiny_dataset):
    # only "a" has a rating (4.0), so the mean fills the others
    assert tiny_dataset.pois["b"].rating == pytest.approx(4.0)
    assert tiny_dataset.pois["c"].rating == pytest.approx(4.0)


def test_all_ratings_missing_uses_constant():
    pois = [{"id": "p", "lat": 0.0, "lon": 0.0, "inserted": "2009-01-01",
             "checkins": 0, "radius_m": 1.0, "categories": ["x"]}]
    ds = load_dataset(pois, [], [], DatasetConfig())
    assert ds.pois["p"].rating == pytest.approx(0.5)


def test_dangling_poi_skipped_by_default_and_strict_fails(tiny_rows):
    pois, visitors, checkins = tiny_rows
    bad = checkins + [{"user": "u1", "poi": "nope", "ts": "2010-01-01T10:00:00"}]
    ds = load_dataset(pois, visitors, bad, DatasetConfig())
    assert len(ds.checkins) == len(checkins)
    with pytest.raises(IngestError):
        load_dataset(pois, visitors, bad, DatasetConfig(strict=True))


def test_malformed_row_reports_line(tmp_path, tiny_rows):
    pois, visitors, checkins = tiny_rows
    path = tmp_path / "pois.jsonl"
    path.write_text('{"id": "ok", "lat": 0, "lon": 0, "inserted": "2009-01-01"}\nnot json\n')
    with pytest.raises(IngestError) as err:
        load_dataset(str(path), visitors, checkins)
    assert ":2:" in str(err.value)


def test_out_of_range_latitude_rejected(tiny_rows):
    pois, visitors, checkins = tiny_rows
    pois = pois + [{"id": "z", "lat": 91.0, "lon": 0.0, "inserted": "2009-01-01"}]
    with pytest.raises(IngestError):
        load_dataset(pois, visitors, checkins)


# Table-8 style bucket boundaries


@pytest.mark.parametrize("attribute,value,bucket", [
    ("check-ins", 3, "very few"),
    ("check-ins", 13, "some"),
    ("friends", 5, "some"),
    ("check-ins", 4, "few"),
    ("check-ins", 34, "some"),
    ("check-ins", 35, "many"),
    ("items", 2, "very few"),
    ("items", 3, "few"),
    ("photos", 6, "many"),
    ("places", 9, "few"),
    ("places", 10, "some"),
])
def test_discretize_boundaries(attribute, value, bucket):
    assert discretize(attribute, value).bucket == bucket


def test_discretize_unknown_attribute():
    with pytest.raises(ValueError):
        discretize("age", 10)


def test_buckets_partition_nonnegative_axis():
    rnd = random.Random(0)
    for attr in DEMOG_ATTRIBUTES:
        for _ in range(200):
            v = rnd.random() * 100
            b = discretize(attr, v)
            assert b.bucket in ("very few", "few", "some", "many")


# Time categories


@pytest.mark.parametrize("ts,hourly,weekly", [
    (datetime(2010, 3, 2, 13, 0), "afternoon", "weekday"),  # Tuesday
    (datetime(2010, 3, 7, 3, 0), "night", "weekend"),       # Sunday
    (datetime(2010, 3, 2, 5, 0), "morning", "weekday"),
    (datetime(2010, 3, 2, 11, 59), "morning", "weekday"),
    (datetime(2010, 3, 2, 12, 0), "afternoon", "weekday"),
    (datetime(2010, 3, 2, 18, 0), "evening", "weekday"),
    (datetime(2010, 3, 2, 23, 0), "night", "weekday"),
    (datetime(2010, 3, 6, 0, 30), "night", "weekend"),      # Saturday
])
def test_time_category(ts, hourly, weekly):
    tc = time_category(ts)
    assert (tc.hourly, tc.weekly) == (hourly, weekly)


def test_time_category_total():
    for hour in range(24):
        tc = time_category(datetime(2010, 1, 1, hour, 0))
        assert tc.hourly in ("morning", "afternoon", "evening", "night")


def test_deterministic_snapshot(tmp_path, tiny_rows):
    pois, visitors, checkins = tiny_rows
    ds1 = load_dataset(pois, visitors, checkins, DatasetConfig())
    ds2 = load_dataset(pois, visitors, checkins, DatasetConfig())
    p1, p2 = tmp_path / "s1.bin", tmp_path / "s2.bin"
    save_snapshot(ds1, p1)
    save_snapshot(ds2, p2)
    assert p1.read_bytes() == p2.read_bytes()
    loaded = load_snapshot(p1)
    assert list(loaded.pois) == list(ds1.pois)
    assert len(loaded.checkins) == len(ds1.checkins)
    assert loaded.stats == ds1.stats


def test_item_dictionary_roundtrip(tiny_dataset):
    items = tiny_dataset.items
    for i in range(len(items)):
        assert items.id_of(items.payload_of(i)) == i
    lo, hi = items.kind_range("poi")
    assert {items.payload_of(i)[1] for i in range(lo, hi)} == set(tiny_dataset.pois)


def test_timezone_offset_applied():
    pois = [{"id": "p", "lat": 0.0, "lon": 0.0, "inserted": "2009-01-01",
             "checkins": 0, "radius_m": 1.0, "categories": ["x"], "rating": 1.0}]
    visitors = [{"id": "u", "demogs": {a: 1 for a in DEMOG_ATTRIBUTES}}]
    checkins = [{"user": "u", "poi": "p", "ts": "2010-01-01T12:00:00Z"}]
    ds = load_dataset(pois, visitors, checkins, DatasetConfig(utc_offset_hours=2.0))
    assert ds.checkins[0].ts.hour == 14
