"""Order-preserving rough and vanishing dates.

The microsecond part of the stored value holds a counter that restarts in
every bucket of the end precision (the rough precision, or the last step of
a vanishing policy). Reductions keep the counter, so values truncated to the
same date still sort in insertion order. Insertions must be chronological.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from typing import TYPE_CHECKING

from .errors import CounterOverflow, OutOfOrderInsertion
from .ordering import context_key, issue
from .precision import PrecisionSpec, as_utc, format_timestamp, parse_timestamp, truncate
from .vanishing import Owner, VanishingItem, VanishingPolicy, insert_item, apply_step

if TYPE_CHECKING:
    from .store import Store

COUNTER_LIMIT = 10**6


@dataclass(frozen=True)
class HybridFieldDef:
    label: str
    precision: PrecisionSpec  # precision applied on assignment
    end_precision: PrecisionSpec  # counter scope
    policy: VanishingPolicy | None = None

    @classmethod
    def rough(cls, label: str, spec: PrecisionSpec) -> HybridFieldDef:
        return cls(label, spec, spec)

    @classmethod
    def vanishing(cls, label: str, policy: VanishingPolicy) -> HybridFieldDef:
        return cls(label, policy.steps[0].precision, policy.end_precision, policy)


def _bucket_label(label: str, bucket: datetime) -> str:
    return f"{label}|{format_timestamp(bucket)}"


def assign_hybrid(store: Store, field: HybridFieldDef, now: datetime) -> datetime:
    """Reduce ``now`` to the field's first precision and encode the bucket counter."""
    now = as_utc(now)
    bucket = truncate(now, field.end_precision)
    head_key = context_key(field.label)
    ctx_key = context_key(_bucket_label(field.label, bucket))
    head = store.hybrid_heads.get(head_key)
    stale = None
    if head is not None:
        head_bucket = parse_timestamp(head["bucket"])
        if bucket < head_bucket:
            raise OutOfOrderInsertion(
                f"{format_timestamp(now)} falls before the current bucket {head['bucket']} of {field.label!r}"
            )
        if bucket > head_bucket:
            stale = head["context"]
    counter = 0 if stale is not None else store.contexts.get(ctx_key, 0)
    if counter >= COUNTER_LIMIT:
        raise CounterOverflow(f"bucket {format_timestamp(bucket)} of {field.label!r} holds {COUNTER_LIMIT} values")
    with store.transaction():
        if stale is not None:
            # only the newest bucket can still receive values
            store.contexts.pop(stale, None)
        c = issue(store, ctx_key) - 1
        store.hybrid_heads[head_key] = {"bucket": format_timestamp(bucket), "context": ctx_key}
    return truncate(now, field.precision).replace(microsecond=c)


def hybrid_reduce(value: datetime, p: PrecisionSpec) -> datetime:
    return apply_step(value, p, ordered=True)


def create_hybrid_vanishing(store: Store, field: HybridFieldDef, now: datetime, owner: Owner) -> VanishingItem:
    if field.policy is None:
        raise ValueError(f"hybrid field {field.label!r} is not policy based")
    with store.transaction():
        value = assign_hybrid(store, field, now)
        return insert_item(store, field.policy, value, owner, ordered=True)
