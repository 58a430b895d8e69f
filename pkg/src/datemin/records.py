"""Record schemas and the record life cycle (create, save, delete).

Each model declares its date fields up front; the store therefore knows
which fields own vanishing items and can cascade deletes without any
reflection over user classes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from typing import TYPE_CHECKING, Any, Mapping

from .errors import UnknownModel, UnknownOwner, ValidationError
from .hybrid import HybridFieldDef, assign_hybrid, create_hybrid_vanishing
from .ordering import next_count
from .precision import PrecisionSpec, as_utc, parse_precision
from .rough import CAPTURE_MODES, RoughFieldDef, rough_capture
from .vanishing import Owner, VanishingPolicy, create_vanishing, delete_owner, register_policy

if TYPE_CHECKING:
    from .store import Store

KINDS = ("plain", "rough", "ordering", "vanishing", "hybrid")


@dataclass(frozen=True)
class Field:
    kind: str
    precision: PrecisionSpec | None = None  # rough; rough-based hybrid
    policy_id: str | None = None  # vanishing; vanishing-based hybrid
    capture: str = "manual"

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValidationError(f"unknown field kind {self.kind!r}")
        if self.capture not in CAPTURE_MODES:
            raise ValidationError(f"unknown capture mode {self.capture!r}")
        if self.kind == "rough" and self.precision is None:
            raise ValidationError("rough fields require an explicit precision")
        if self.kind == "vanishing" and self.policy_id is None:
            raise ValidationError("vanishing fields require a policy")
        if self.kind == "hybrid" and (self.precision is None) == (self.policy_id is None):
            raise ValidationError("hybrid fields take either a precision or a policy")

    @property
    def holds_item(self) -> bool:
        return self.policy_id is not None

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"kind": self.kind, "capture": self.capture}
        if self.precision is not None:
            d["precision"] = str(self.precision)
        if self.policy_id is not None:
            d["policy"] = self.policy_id
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> Field:
        p = d.get("precision")
        return cls(d["kind"], parse_precision(p) if p else None, d.get("policy"), d.get("capture", "manual"))


def plain_field(capture: str = "manual") -> Field:
    return Field("plain", capture=capture)


def rough_field(spec: PrecisionSpec, capture: str = "manual") -> Field:
    return Field("rough", precision=spec, capture=capture)


def ordering_field() -> Field:
    return Field("ordering")


def vanishing_field(policy: VanishingPolicy, capture: str = "on_create") -> Field:
    return Field("vanishing", policy_id=policy.id, capture=capture)


def hybrid_field(
    *, precision: PrecisionSpec | None = None, policy: VanishingPolicy | None = None, capture: str = "on_create"
) -> Field:
    return Field("hybrid", precision=precision, policy_id=policy.id if policy else None, capture=capture)


@dataclass
class Record:
    id: str
    model: str
    fields: dict[str, Any] = field(default_factory=dict)
    payload: dict[str, Any] = field(default_factory=dict)


def declare_model(store: Store, name: str, fields: Mapping[str, Field], policies: tuple = ()) -> None:
    """Register a model schema. Policies used by its fields are stored alongside."""
    with store.transaction():
        for p in policies:
            register_policy(store, p)
        for fname, f in fields.items():
            if f.policy_id is not None and f.policy_id not in store.policies:
                raise ValidationError(f"field {name}.{fname} references unknown policy {f.policy_id[:12]}")
        existing = store.models.get(name)
        if existing is not None and existing != dict(fields):
            raise ValidationError(f"model {name!r} is already declared with a different schema")
        store.models[name] = dict(fields)


def _hybrid_def(store: Store, model: str, fname: str, f: Field) -> HybridFieldDef:
    label = f"{model}.{fname}"
    if f.policy_id is not None:
        return HybridFieldDef.vanishing(label, store.policies[f.policy_id])
    return HybridFieldDef.rough(label, f.precision)


def _set_field(store: Store, record: Record, fname: str, f: Field, when: datetime) -> None:
    if f.kind == "plain":
        record.fields[fname] = when
    elif f.kind == "rough":
        record.fields[fname] = rough_capture(RoughFieldDef(f.precision, f.capture), when)
    elif f.kind == "vanishing":
        create_vanishing(store, store.policies[f.policy_id], when, Owner(record.id, fname))
    elif f.kind == "hybrid":
        hdef = _hybrid_def(store, record.model, fname, f)
        if hdef.policy is not None:
            create_hybrid_vanishing(store, hdef, when, Owner(record.id, fname))
        else:
            record.fields[fname] = assign_hybrid(store, hdef, when)


def _apply(
    store: Store,
    record: Record,
    now: datetime,
    values: Mapping[str, datetime],
    labels: Mapping[str, str],
    creating: bool,
) -> None:
    schema = store.models[record.model]
    unknown = (set(values) | set(labels)) - set(schema)
    if unknown:
        raise ValidationError(f"model {record.model!r} has no field(s) {sorted(unknown)}")
    for fname, f in schema.items():
        if f.kind == "ordering":
            if fname in values:
                raise ValidationError(f"ordering field {fname!r} takes a context label, not a date")
            if fname in labels:
                record.fields[fname] = next_count(store, labels[fname])
            continue
        if fname in labels:
            raise ValidationError(f"field {fname!r} is not an ordering field")
        if fname in values:
            when = values[fname]
        elif f.capture == "on_save" or (f.capture == "on_create" and creating):
            when = now
        else:
            continue
        _set_field(store, record, fname, f, as_utc(when))


def create_record(
    store: Store,
    model: str,
    now: datetime,
    values: Mapping[str, datetime] | None = None,
    labels: Mapping[str, str] | None = None,
    payload: Mapping[str, Any] | None = None,
) -> Record:
    """Create a record; auto-captured fields take ``now``, others the given values.

    ``labels`` maps ordering fields to their context label; the label itself
    is never stored.
    """
    if model not in store.models:
        raise UnknownModel(f"model {model!r} is not declared")
    with store.transaction():
        record = Record(store.new_id(), model, {name: None for name in store.models[model]}, dict(payload or {}))
        store.records[record.id] = record
        _apply(store, record, as_utc(now), values or {}, labels or {}, creating=True)
        return record


def save_record(
    store: Store,
    record_id: str,
    now: datetime,
    values: Mapping[str, datetime] | None = None,
    labels: Mapping[str, str] | None = None,
    payload: Mapping[str, Any] | None = None,
) -> Record:
    record = store.records.get(record_id)
    if record is None:
        raise UnknownOwner(f"record {record_id} does not exist")
    with store.transaction():
        _apply(store, record, as_utc(now), values or {}, labels or {}, creating=False)
        if payload is not None:
            record.payload = dict(payload)
        return record


def delete_record(store: Store, record_id: str) -> None:
    delete_owner(store, record_id)
