"""Single-file JSON document store.

The whole state lives in one UTF-8 JSON file written with sorted keys, so
two stores built by the same operations are byte-identical. Writes go to a
temporary file that is renamed over the original. A sibling ``.lock`` file
admits one writer at a time; read-only handles take no lock and work on the
snapshot loaded at open time.
"""

from __future__ import annotations

import copy
import json
import os
import random
import re
import tempfile
import uuid
from contextlib import contextmanager
from datetime import datetime, timedelta
from pathlib import Path
from typing import Callable, Iterator

import filelock

from .errors import CorruptStore, PolicyError, ReadOnlyStore, StoreIO, StoreLocked, VersionMismatch
from .ordering import HASH_ALGORITHM
from .precision import format_timestamp, parse_timestamp
from .records import Field, Record
from .vanishing import (
    Owner,
    ReductionEvent,
    VanishingItem,
    VanishingPolicy,
    policy_id,
    validate_steps,
)

FORMAT_VERSION = 1
_HEX64 = re.compile(r"[0-9a-f]{64}")


def seeded_ids(seed: int) -> Callable[[], str]:
    """Reproducible version-4 UUIDs, for replays and tests."""
    rng = random.Random(seed)
    return lambda: str(uuid.UUID(int=rng.getrandbits(128), version=4))


def random_ids() -> str:
    return str(uuid.uuid4())


class Store:
    def __init__(
        self,
        path: str | os.PathLike | None = None,
        *,
        readonly: bool = False,
        id_factory: Callable[[], str] = random_ids,
        autocommit: bool = True,
    ) -> None:
        self.path = Path(path) if path is not None else None
        self.readonly = readonly
        self.autocommit = autocommit
        self.id_factory = id_factory
        self.meta = {"format_version": FORMAT_VERSION, "hash_algorithm": HASH_ALGORITHM}
        self.models: dict[str, dict[str, Field]] = {}
        self.records: dict[str, Record] = {}
        self.contexts: dict[str, int] = {}
        self.policies: dict[str, VanishingPolicy] = {}
        self.items: dict[str, VanishingItem] = {}
        self.events: dict[str, ReductionEvent] = {}
        self.hybrid_heads: dict[str, dict[str, str]] = {}
        self._depth = 0
        self._lock: filelock.BaseFileLock | None = None

    # -- life cycle -------------------------------------------------------

    @classmethod
    def open(
        cls,
        path: str | os.PathLike,
        *,
        readonly: bool = False,
        id_factory: Callable[[], str] = random_ids,
        autocommit: bool = True,
    ) -> Store:
        store = cls(path, readonly=readonly, id_factory=id_factory, autocommit=autocommit)
        if not readonly:
            store._acquire()
        try:
            if store.path.exists():
                try:
                    doc = json.loads(store.path.read_text(encoding="utf-8"))
                except (OSError, UnicodeDecodeError) as exc:
                    raise StoreIO(f"cannot read {store.path}: {exc}") from exc
                except json.JSONDecodeError as exc:
                    raise CorruptStore(f"{store.path} is not valid JSON: {exc}") from exc
                store._load(doc)
        except BaseException:
            store.close()
            raise
        return store

    def _acquire(self) -> None:
        lock = filelock.FileLock(str(self.path) + ".lock", timeout=0, is_singleton=False)
        try:
            lock.acquire()
        except filelock.Timeout as exc:
            raise StoreLocked(f"{self.path} is locked by another writer") from exc
        self._lock = lock

    def close(self) -> None:
        if self._lock is not None:
            self._lock.release()
            self._lock = None

    def __enter__(self) -> Store:
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def new_id(self) -> str:
        while True:
            candidate = self.id_factory()
            if candidate not in self.records and candidate not in self.items and candidate not in self.events:
                return candidate

    # -- mutation ---------------------------------------------------------

    @contextmanager
    def transaction(self) -> Iterator[Store]:
        """Group mutations; the outermost block commits or rolls back."""
        if self.readonly:
            raise ReadOnlyStore(f"{self.path} was opened read-only")
        if self._depth:
            self._depth += 1
            try:
                yield self
            finally:
                self._depth -= 1
            return
        snapshot = self._snapshot()
        self._depth = 1
        try:
            yield self
            if self.autocommit and self.path is not None:
                self.commit()
        except BaseException:
            self._restore(snapshot)
            raise
        finally:
            self._depth = 0

    def _snapshot(self) -> tuple:
        # records and items are the only mutable values; payloads are replaced, never edited
        return (
            dict(self.models),
            {k: Record(r.id, r.model, dict(r.fields), r.payload) for k, r in self.records.items()},
            dict(self.contexts),
            dict(self.policies),
            {k: copy.copy(i) for k, i in self.items.items()},
            dict(self.events),
            copy.deepcopy(self.hybrid_heads),
        )

    def _restore(self, snapshot: tuple) -> None:
        (self.models, self.records, self.contexts, self.policies,
         self.items, self.events, self.hybrid_heads) = snapshot

    def commit(self) -> None:
        """Atomically replace the store file with the current document."""
        if self.readonly:
            raise ReadOnlyStore(f"{self.path} was opened read-only")
        if self.path is None:
            return
        data = self.dumps().encode("utf-8")
        directory = self.path.parent
        try:
            fd, tmp = tempfile.mkstemp(prefix=f".{self.path.name}.", suffix=".tmp", dir=directory)
        except OSError as exc:
            raise StoreIO(f"cannot write to {directory}: {exc}") from exc
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self.path)
        except OSError as exc:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise StoreIO(f"cannot write {self.path}: {exc}") from exc

    # -- serialisation ----------------------------------------------------

    def _field_out(self, kind: Field, value):
        if value is None:
            return None
        if kind.kind == "ordering" or kind.holds_item:
            return value
        return format_timestamp(value)

    def _field_in(self, kind: Field, value):
        if value is None:
            return None
        if kind.kind == "ordering" or kind.holds_item:
            return value
        return parse_timestamp(value)

    def to_document(self) -> dict:
        records = {}
        for rid, r in self.records.items():
            schema = self.models[r.model]
            records[rid] = {
                "id": r.id,
                "model": r.model,
                "fields": {name: self._field_out(schema[name], v) for name, v in r.fields.items()},
                "payload": copy.deepcopy(r.payload),
            }
        return {
            "meta": dict(self.meta),
            "models": {m: {f: d.to_dict() for f, d in fields.items()} for m, fields in self.models.items()},
            "records": records,
            "contexts": {k: {"key": k, "counter": c} for k, c in self.contexts.items()},
            "policies": {pid: p.to_dict() for pid, p in self.policies.items()},
            "items": {
                iid: {
                    "id": i.id,
                    "value": format_timestamp(i.value),
                    "policy_id": i.policy_id,
                    "step_index": i.step_index,
                    "owner": {"record": i.owner.record, "field": i.owner.field},
                    "ordered": i.ordered,
                }
                for iid, i in self.items.items()
            },
            "events": {
                eid: {"id": e.id, "item_id": e.item_id, "due": format_timestamp(e.due), "step_index": e.step_index}
                for eid, e in self.events.items()
            },
            "hybrid_heads": copy.deepcopy(self.hybrid_heads),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_document(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_document(cls, doc: dict, **kwargs) -> Store:
        store = cls(**kwargs)
        store._load(doc)
        return store

    def _load(self, doc: dict, check: bool = True) -> None:
        try:
            meta = doc["meta"]
            if meta.get("format_version") != FORMAT_VERSION:
                raise VersionMismatch(
                    f"store format version {meta.get('format_version')!r}, expected {FORMAT_VERSION}"
                )
            if meta.get("hash_algorithm") != HASH_ALGORITHM:
                raise VersionMismatch(f"unsupported hash algorithm {meta.get('hash_algorithm')!r}")
            models = {m: {f: Field.from_dict(d) for f, d in fields.items()} for m, fields in doc["models"].items()}
            policies = {pid: VanishingPolicy.from_dict(p) for pid, p in doc["policies"].items()}
            records = {}
            for rid, r in doc["records"].items():
                schema = models.get(r["model"])
                if schema is None:
                    raise CorruptStore(f"record {rid} uses undeclared model {r['model']!r}")
                if set(r["fields"]) != set(schema):
                    raise CorruptStore(f"record {rid} fields do not match model {r['model']!r}")
                fields = {name: self._field_in(schema[name], v) for name, v in r["fields"].items()}
                records[rid] = Record(r["id"], r["model"], fields, copy.deepcopy(r.get("payload", {})))
            contexts = {k: int(c["counter"]) for k, c in doc["contexts"].items()}
            items = {
                iid: VanishingItem(
                    i["id"],
                    parse_timestamp(i["value"]),
                    i["policy_id"],
                    int(i["step_index"]),
                    Owner(i["owner"]["record"], i["owner"]["field"]),
                    bool(i.get("ordered", False)),
                )
                for iid, i in doc["items"].items()
            }
            events = {
                eid: ReductionEvent(e["id"], e["item_id"], parse_timestamp(e["due"]), int(e["step_index"]))
                for eid, e in doc["events"].items()
            }
            heads = copy.deepcopy(doc.get("hybrid_heads", {}))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            if isinstance(exc, (VersionMismatch, CorruptStore)):
                raise
            raise CorruptStore(f"malformed document: {exc!r}") from exc
        self.meta = dict(meta)
        self.models, self.policies, self.records = models, policies, records
        self.contexts, self.items, self.events, self.hybrid_heads = contexts, items, events, heads
        if check:
            self.validate()

    # -- integrity --------------------------------------------------------

    def integrity_problems(self) -> list[str]:
        """Every broken invariant, in a deterministic order."""
        problems: list[str] = []
        for pid in sorted(self.policies):
            p = self.policies[pid]
            if p.id != pid or policy_id(p.steps) != pid:
                problems.append(f"policy {pid} does not match its content hash")
            try:
                validate_steps(p.steps)
            except PolicyError as exc:
                problems.append(f"policy {pid} is invalid: {exc}")
        for name in sorted(self.models):
            for fname, f in sorted(self.models[name].items()):
                if f.policy_id is not None and f.policy_id not in self.policies:
                    problems.append(f"field {name}.{fname} references missing policy {f.policy_id}")
        for rid in sorted(self.records):
            r = self.records[rid]
            if r.id != rid:
                problems.append(f"record {rid} is stored under a different id {r.id}")
            for fname, f in sorted(self.models[r.model].items()):
                v = r.fields.get(fname)
                if f.holds_item and v is not None:
                    item = self.items.get(v)
                    if item is None:
                        problems.append(f"record {rid} field {fname} references missing item {v}")
                    elif item.owner != Owner(rid, fname):
                        problems.append(f"record {rid} field {fname} references item {v} owned elsewhere")
        for k in sorted(self.contexts):
            if not _HEX64.fullmatch(k):
                problems.append(f"context key {k!r} is not a 256-bit hex digest")
            if self.contexts[k] < 0:
                problems.append(f"context {k} has a negative counter")
        events_by_item: dict[str, list[ReductionEvent]] = {}
        for eid in sorted(self.events):
            e = self.events[eid]
            events_by_item.setdefault(e.item_id, []).append(e)
            if e.id != eid:
                problems.append(f"event {eid} is stored under a different id {e.id}")
            item = self.items.get(e.item_id)
            if item is None:
                problems.append(f"event {eid} references missing item {e.item_id}")
                continue
            policy = self.policies.get(item.policy_id)
            if policy is None:
                continue
            if e.step_index != item.step_index + 1 or e.step_index >= len(policy.steps):
                problems.append(f"event {eid} applies step {e.step_index} to item {item.id} at step {item.step_index}")
            elif e.due != item.value + timedelta(seconds=policy.steps[e.step_index].offset):
                problems.append(f"event {eid} due date is not derived from the reduced value")
        for iid in sorted(self.items):
            i = self.items[iid]
            if i.id != iid:
                problems.append(f"item {iid} is stored under a different id {i.id}")
            policy = self.policies.get(i.policy_id)
            if policy is None:
                problems.append(f"item {iid} references missing policy {i.policy_id}")
            elif not 0 <= i.step_index < len(policy.steps):
                problems.append(f"item {iid} step index {i.step_index} is out of range")
            elif len(events_by_item.get(iid, ())) != (1 if i.step_index < len(policy.steps) - 1 else 0):
                problems.append(f"item {iid} has {len(events_by_item.get(iid, ()))} pending events")
            owner = self.records.get(i.owner.record)
            if owner is None:
                problems.append(f"item {iid} references missing owner record {i.owner.record}")
            elif owner.fields.get(i.owner.field) != iid:
                problems.append(f"item {iid} is not referenced by its owner {i.owner.record}.{i.owner.field}")
        for hk in sorted(self.hybrid_heads):
            head = self.hybrid_heads[hk]
            if head.get("context") not in self.contexts:
                problems.append(f"hybrid head {hk} references missing context {head.get('context')}")
        return problems

    def validate(self) -> None:
        problems = self.integrity_problems()
        if problems:
            raise CorruptStore(problems[0])


def open_store(path: str | os.PathLike, **kwargs) -> Store:
    return Store.open(path, **kwargs)


def load_snapshot(path: str | os.PathLike) -> Store:
    return Store.open(path, readonly=True)

