"""Ordering dates: per-context counters standing in for creation timestamps.

Only the SHA-256 digest of a context label is stored, so the mapping from
labels (which may name users) to counters lives in calling code.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .errors import CounterOverflow, EmptyLabel

if TYPE_CHECKING:
    from .store import Store

HASH_ALGORITHM = "sha256"
MAX_PERSISTED_COUNT = 2**32 - 1


@dataclass(frozen=True)
class OrderingContext:
    key: str
    counter: int = 0  # last issued count

    def to_dict(self) -> dict:
        return {"key": self.key, "counter": self.counter}


def context_key(label: str) -> str:
    if not label:
        raise EmptyLabel("context label must be non-empty")
    return hashlib.sha256(label.encode("utf-8")).hexdigest()


def issue(store: Store, key: str) -> int:
    """Increment the context stored under ``key`` and return the new count."""
    count = store.contexts.get(key, 0) + 1
    if count > MAX_PERSISTED_COUNT:
        raise CounterOverflow(f"context {key[:12]}... exceeds the 32-bit counter range")
    with store.transaction():
        store.contexts[key] = count
    return count


def next_count(store: Store, label: str) -> int:
    """Return the next count (1, 2, ...) of the context named by ``label``."""
    return issue(store, context_key(label))


def current_count(store: Store, label: str) -> int:
    return store.contexts.get(context_key(label), 0)
