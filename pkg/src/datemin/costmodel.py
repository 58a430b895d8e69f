"""Storage cost of each date type relative to a plain 8-byte datetime.

Byte sizes model a MariaDB-style relational engine. A vanishing date needs
three UUID columns (item, event, policy reference), two dates (value and
due date), a foreign key and a step counter.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import EmptyMix, UnknownKind

UUID_BYTES = 38
DATE_BYTES = 8
INT_BYTES = 4
CONTEXT_BYTES = 44

VANISHING_BYTES = 3 * UUID_BYTES + 2 * DATE_BYTES + 2 * INT_BYTES

FIELD_COSTS = {
    "plain": DATE_BYTES,
    "rough": DATE_BYTES,
    "ordering": INT_BYTES,
    "vanishing": VANISHING_BYTES,
    # vanishing + order: the counter lives in the sub-second digits, no extra column
    "hybrid": VANISHING_BYTES,
}

AUX_COSTS = {
    "context": CONTEXT_BYTES,
    "uuid": UUID_BYTES,
    "date": DATE_BYTES,
    "int": INT_BYTES,
}

ALIASES = {
    "datetime": "plain",
    "plain-datetime": "plain",
    "rd": "rough",
    "od": "ordering",
    "vd": "vanishing",
    "vd+o": "hybrid",
    "vanishing+order": "hybrid",
}

# Date fields of the Taiga project tracker and their suggested replacements.
TAIGA_REPLACEMENTS = (
    ("Attachment", "created_date", "ordering"),
    ("Epic", "created_date", "rough"),
    ("HistoryChangeNotification", "updated_datetime", "rough"),
    ("HistoryEntry", "created_at", "hybrid"),
    ("HistoryEntry", "delete_comment_date", "vanishing"),
    ("HistoryEntry", "edit_comment_date", "vanishing"),
    ("Issue", "created_date", "rough"),
    ("Issue", "modified_date", "rough"),
    ("Like", "created_date", "rough"),
    ("Task", "created_date", "rough"),
    ("TimeLine", "created", "hybrid"),
    ("User", "date_joined", "rough"),
    ("UserStory", "created_date", "rough"),
    ("Watched", "created_date", "ordering"),
    ("WebNotification", "created", "hybrid"),
    ("WebNotification", "read", "ordering"),
    ("WikiPage", "created_date", "rough"),
    ("WikiPage", "modified_date", "rough"),
)


def normalize_kind(kind: str) -> str:
    k = kind.strip().lower()
    k = ALIASES.get(k, k)
    if k not in FIELD_COSTS:
        raise UnknownKind(f"unknown field kind {kind!r}")
    return k


def field_cost(kind: str) -> int:
    return FIELD_COSTS[normalize_kind(kind)]


def factor(kind: str) -> Fraction:
    return Fraction(field_cost(kind), FIELD_COSTS["plain"])


@dataclass(frozen=True)
class ScenarioCost:
    total: int
    fields: int
    average: Fraction
    factor: Fraction


def scenario_cost(mix: Iterable[tuple[str, int]]) -> ScenarioCost:
    """Unweighted per-field average over a field mix, relative to plain datetimes."""
    total = 0
    fields = 0
    for kind, count in mix:
        if count < 0:
            raise ValueError(f"negative count for {kind!r}")
        total += field_cost(kind) * count
        fields += count
    if fields == 0:
        raise EmptyMix("scenario has no fields")
    average = Fraction(total, fields)
    return ScenarioCost(total, fields, average, average / FIELD_COSTS["plain"])


def taiga_mix() -> list[tuple[str, int]]:
    counts: dict[str, int] = {}
    for _, _, kind in TAIGA_REPLACEMENTS:
        counts[kind] = counts.get(kind, 0) + 1
    return sorted(counts.items())


def format_number(x: Fraction | float | int) -> str:
    """At most two decimals, trailing zeros dropped: 138, 17.25, 43.44."""
    text = f"{float(x):.2f}".rstrip("0").rstrip(".")
    return text
