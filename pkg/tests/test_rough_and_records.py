from __future__ import annotations

import pytest

from datemin import (
    RoughFieldDef,
    create_record,
    declare_model,
    delete_record,
    hybrid_field,
    make_policy,
    ordering_field,
    plain_field,
    precision,
    rough_capture,
    rough_field,
    save_record,
    truncate,
    vanishing_field,
)
from datemin import parse_timestamp as ts
from datemin.errors import UnknownModel, ValidationError
from datemin.records import Field


@pytest.mark.parametrize(
    "spec,raw,expected",
    [
        (precision(hours=1), "2021-11-08T15:17:00Z", "2021-11-08T15:00:00Z"),
        (precision(hours=1), "2021-11-08T15:00:00Z", "2021-11-08T15:00:00Z"),
        (precision(seconds=30), "2021-11-08T12:20:33.040852Z", "2021-11-08T12:20:30Z"),
    ],
)
def test_rough_capture(spec, raw, expected):
    assert rough_capture(RoughFieldDef(spec, "on_create"), ts(raw)) == ts(expected)


def test_rough_field_requires_precision():
    with pytest.raises(ValidationError):
        RoughFieldDef(None)
    with pytest.raises(ValidationError):
        Field("rough")
    with pytest.raises(ValidationError):
        RoughFieldDef(precision(hours=1), "sometimes")


@pytest.fixture
def issue(store):
    policy = make_policy([("1h", 0), ("1d", 10800)], store)
    declare_model(
        store,
        "Issue",
        {
            "created": rough_field(precision(hours=1), capture="on_create"),
            "modified": rough_field(precision(minutes=15), capture="on_save"),
            "due": rough_field(precision(days=1)),
            "raw": plain_field(),
            "position": ordering_field(),
            "edited": vanishing_field(policy, capture="manual"),
            "history": hybrid_field(precision=precision(minutes=1)),
        },
    )
    return store


def test_capture_modes(issue):
    store = issue
    r = create_record(
        store, "Issue", ts("2021-11-08T15:17:42Z"), values={"due": ts("2021-12-24T18:30Z")}, labels={"position": "p:1"}
    )
    assert r.fields["created"] == ts("2021-11-08T15:00Z")
    assert r.fields["modified"] == ts("2021-11-08T15:15Z")
    assert r.fields["due"] == ts("2021-12-24T00:00Z")
    assert r.fields["raw"] is None
    assert r.fields["position"] == 1
    assert r.fields["edited"] is None
    assert r.fields["history"] == ts("2021-11-08T15:17:00Z")

    save_record(store, r.id, ts("2021-11-08T16:48Z"), values={"edited": ts("2021-11-08T16:48Z")})
    assert r.fields["created"] == ts("2021-11-08T15:00Z")
    assert r.fields["modified"] == ts("2021-11-08T16:45Z")
    item = store.items[r.fields["edited"]]
    assert item.value == ts("2021-11-08T16:00Z")
    assert store.integrity_problems() == []


def test_every_persisted_rough_value_is_on_grid(issue):
    store = issue
    for minute in range(0, 60, 7):
        create_record(store, "Issue", ts(f"2021-11-08T15:{minute:02d}:{minute % 60:02d}.5Z"))
    schema = store.models["Issue"]
    for r in store.records.values():
        for name, f in schema.items():
            if f.kind == "rough" and r.fields[name] is not None:
                assert truncate(r.fields[name], f.precision) == r.fields[name]


def test_resaving_vanishing_field_replaces_item(issue):
    store = issue
    r = create_record(store, "Issue", ts("2021-11-08T15:00Z"), values={"edited": ts("2021-11-08T15:10Z")})
    first = r.fields["edited"]
    save_record(store, r.id, ts("2021-11-08T16:00Z"), values={"edited": ts("2021-11-08T16:10Z")})
    assert r.fields["edited"] != first and first not in store.items
    assert len(store.items) == 1 and len(store.events) == 1


def test_delete_record_cascades(issue):
    store = issue
    r = create_record(store, "Issue", ts("2021-11-08T15:00Z"), values={"edited": ts("2021-11-08T15:10Z")})
    delete_record(store, r.id)
    assert store.items == {} and store.events == {} and store.records == {}


def test_schema_errors(issue):
    store = issue
    with pytest.raises(UnknownModel):
        create_record(store, "Nope", ts("2021-11-08T15:00Z"))
    with pytest.raises(ValidationError):
        create_record(store, "Issue", ts("2021-11-08T15:00Z"), values={"bogus": ts("2021-11-08T15:00Z")})
    with pytest.raises(ValidationError):
        create_record(store, "Issue", ts("2021-11-08T15:00Z"), values={"position": ts("2021-11-08T15:00Z")})
    with pytest.raises(ValidationError):
        create_record(store, "Issue", ts("2021-11-08T15:00Z"), labels={"created": "x"})
    with pytest.raises(ValidationError):
        declare_model(store, "Issue", {"created": plain_field()})
    assert store.records == {}


def test_field_needs_registered_policy(store):
    policy = make_policy([("1h", 0)])
    with pytest.raises(ValidationError):
        declare_model(store, "M", {"t": vanishing_field(policy)})
    declare_model(store, "M", {"t": vanishing_field(policy)}, policies=(policy,))
    assert policy.id in store.policies
