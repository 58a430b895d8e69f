"""Vanishing dates: stepwise precision reduction driven by a due-event queue.

A policy is an ordered list of steps. Step 0 is applied on creation; every
later step ``i`` becomes due ``steps[i].offset`` seconds after the value
produced by step ``i - 1``. Due dates are computed from the already reduced
value so the schedule itself never reveals the discarded precision.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import uuid
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import TYPE_CHECKING, Iterable, Sequence, Union

from .errors import (
    CorruptQueue,
    NonMonotonicOffset,
    NonMonotonicPrecision,
    PolicyError,
    StepExceedsNextOffset,
    UnknownItem,
    UnknownOwner,
)
from .precision import (
    SYMBOLS,
    PrecisionSpec,
    as_utc,
    nominal_duration,
    parse_precision,
    precision,
    truncate,
)

if TYPE_CHECKING:
    from .store import Store

_OFFSET_SECONDS = {
    "after_seconds": 1,
    "after_minutes": 60,
    "after_hours": 3600,
    "after_days": 86400,
    "after_weeks": 604800,
}


@dataclass(frozen=True)
class VanishingStep:
    precision: PrecisionSpec
    offset: int = 0  # seconds after the previous step's reduced value


def step(**kwargs: int) -> VanishingStep:
    """``step(days=1, after_hours=3)``; offsets are fixed durations only."""
    offset = 0
    unit = {}
    for key, value in kwargs.items():
        if key in _OFFSET_SECONDS:
            offset += value * _OFFSET_SECONDS[key]
        else:
            unit[key] = value
    return VanishingStep(precision(**unit), offset)


StepLike = Union[VanishingStep, Sequence]


def _coerce_step(s: StepLike) -> VanishingStep:
    if isinstance(s, VanishingStep):
        return s
    p, offset = s
    if isinstance(p, str):
        p = parse_precision(p)
    if isinstance(offset, timedelta):
        if offset.microseconds:
            raise PolicyError(f"offset {offset} is not a whole number of seconds")
        offset = int(offset.total_seconds())
    if not isinstance(p, PrecisionSpec) or isinstance(offset, bool) or not isinstance(offset, int):
        raise PolicyError(f"cannot interpret step {s!r}")
    if offset < 0:
        raise PolicyError(f"negative offset {offset}")
    return VanishingStep(p, offset)


def canonical_steps(steps: Iterable[VanishingStep]) -> list[list]:
    return [[SYMBOLS[s.precision.unit], s.precision.count, s.offset] for s in steps]


def policy_id(steps: Iterable[VanishingStep]) -> str:
    blob = json.dumps(canonical_steps(steps), separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class VanishingPolicy:
    id: str
    steps: tuple[VanishingStep, ...]

    @property
    def end_precision(self) -> PrecisionSpec:
        return self.steps[-1].precision

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "steps": [{"precision": str(s.precision), "offset": s.offset} for s in self.steps],
        }

    @classmethod
    def from_dict(cls, d: dict) -> VanishingPolicy:
        steps = tuple(VanishingStep(parse_precision(s["precision"]), int(s["offset"])) for s in d["steps"])
        return cls(d["id"], steps)


def validate_steps(steps: Sequence[VanishingStep]) -> None:
    if not steps:
        raise PolicyError("a policy needs at least one step")
    if steps[0].offset != 0:
        raise PolicyError(f"first step is applied on creation; offset must be 0, got {steps[0].offset}")
    for i in range(1, len(steps)):
        prev, cur = steps[i - 1], steps[i]
        if nominal_duration(cur.precision) <= nominal_duration(prev.precision):
            raise NonMonotonicPrecision(f"step {i} precision {cur.precision} is not coarser than {prev.precision}")
    for i in range(2, len(steps)):
        if steps[i].offset <= steps[i - 1].offset:
            raise NonMonotonicOffset(
                f"step {i} offset {steps[i].offset}s does not exceed step {i - 1} offset {steps[i - 1].offset}s"
            )
    for i in range(len(steps) - 1):
        if nominal_duration(steps[i].precision) > steps[i + 1].offset:
            raise StepExceedsNextOffset(
                f"step {i} precision {steps[i].precision} ({nominal_duration(steps[i].precision)}s) "
                f"exceeds step {i + 1} offset {steps[i + 1].offset}s"
            )


def make_policy(steps: Iterable[StepLike], store: Store | None = None) -> VanishingPolicy:
    """Validate a step list and return its content-addressed policy.

    With a store, an existing policy of the same content is returned and no
    duplicate is stored.
    """
    coerced = tuple(_coerce_step(s) for s in steps)
    validate_steps(coerced)
    policy = VanishingPolicy(policy_id(coerced), coerced)
    if store is not None:
        policy = register_policy(store, policy)
    return policy


def register_policy(store: Store, policy: VanishingPolicy) -> VanishingPolicy:
    existing = store.policies.get(policy.id)
    if existing is not None:
        return existing
    with store.transaction():
        store.policies[policy.id] = policy
    return policy


@dataclass(frozen=True)
class Owner:
    record: str
    field: str


@dataclass
class VanishingItem:
    id: str
    value: datetime
    policy_id: str
    step_index: int
    owner: Owner
    ordered: bool = False  # sub-second part is an ordering counter


@dataclass(frozen=True)
class ReductionEvent:
    id: str
    item_id: str
    due: datetime
    step_index: int


@dataclass(frozen=True)
class ReductionReport:
    applied: int
    pending: int


def event_id(item_id: str, step_index: int) -> str:
    """Event ids are derived from the (random) item id, never from a clock or sequence."""
    digest = hashlib.sha256(f"{item_id}:{step_index}".encode("ascii")).digest()
    return str(uuid.UUID(bytes=digest[:16], version=4))


def apply_step(value: datetime, p: PrecisionSpec, ordered: bool) -> datetime:
    reduced = truncate(value, p)
    if ordered:
        reduced = reduced.replace(microsecond=value.microsecond)
    return reduced


def _schedule(store: Store, item: VanishingItem, policy: VanishingPolicy) -> ReductionEvent | None:
    nxt = item.step_index + 1
    if nxt >= len(policy.steps):
        return None
    ev = ReductionEvent(
        event_id(item.id, nxt), item.id, item.value + timedelta(seconds=policy.steps[nxt].offset), nxt
    )
    store.events[ev.id] = ev
    return ev


def insert_item(
    store: Store, policy: VanishingPolicy, value: datetime, owner: Owner, ordered: bool
) -> VanishingItem:
    record = store.records.get(owner.record)
    if record is None:
        raise UnknownOwner(f"record {owner.record} does not exist")
    policy = register_policy(store, policy)
    item = VanishingItem(store.new_id(), value, policy.id, 0, owner, ordered)
    old = record.fields.get(owner.field)
    if old is not None and old in store.items:
        delete_item(store, old)
    store.items[item.id] = item
    record.fields[owner.field] = item.id
    _schedule(store, item, policy)
    return item


def create_vanishing(store: Store, policy: VanishingPolicy, now: datetime, owner: Owner) -> VanishingItem:
    """Create an item at ``now`` reduced by the first step; enqueue the second."""
    with store.transaction():
        value = truncate(as_utc(now), policy.steps[0].precision)
        return insert_item(store, policy, value, owner, ordered=False)


def reduce_due(store: Store, now: datetime) -> ReductionReport:
    """Apply every reduction due at ``now``, including ones that become due during the pass."""
    now = as_utc(now)
    applied = 0
    with store.transaction():
        heap = [(ev.due, ev.item_id, ev.id) for ev in store.events.values() if ev.due <= now]
        heapq.heapify(heap)
        while heap:
            _, item_id, eid = heapq.heappop(heap)
            ev = store.events.pop(eid)
            item = store.items.get(item_id)
            if item is None:
                raise CorruptQueue(f"event {eid} references missing item {item_id}")
            if ev.step_index != item.step_index + 1:
                raise CorruptQueue(f"event {eid} applies step {ev.step_index} to item at step {item.step_index}")
            policy = store.policies[item.policy_id]
            item.value = apply_step(item.value, policy.steps[ev.step_index].precision, item.ordered)
            item.step_index = ev.step_index
            applied += 1
            nxt = _schedule(store, item, policy)
            if nxt is not None and nxt.due <= now:
                heapq.heappush(heap, (nxt.due, nxt.item_id, nxt.id))
    return ReductionReport(applied, len(store.events))


def pending_event(store: Store, item_id: str) -> ReductionEvent | None:
    for ev in store.events.values():
        if ev.item_id == item_id:
            return ev
    return None


def delete_item(store: Store, item_id: str) -> None:
    """Remove an item and its events and clear the owning record's reference."""
    with store.transaction():
        item = store.items.pop(item_id, None)
        if item is None:
            raise UnknownItem(f"item {item_id} does not exist")
        for eid in [e.id for e in store.events.values() if e.item_id == item_id]:
            del store.events[eid]
        record = store.records.get(item.owner.record)
        if record is not None and record.fields.get(item.owner.field) == item_id:
            record.fields[item.owner.field] = None


def delete_owner(store: Store, record_id: str) -> None:
    """Delete a record together with all vanishing items it owns."""
    with store.transaction():
        if record_id not in store.records:
            raise UnknownOwner(f"record {record_id} does not exist")
        for iid in [i.id for i in store.items.values() if i.owner.record == record_id]:
            delete_item(store, iid)
        del store.records[record_id]
