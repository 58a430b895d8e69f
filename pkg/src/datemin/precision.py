"""Precision specifications and calendar-aware truncation.

All timestamps handled by this package are timezone-aware UTC ``datetime``
objects. Naive datetimes are interpreted as UTC.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

from .errors import InvalidCount, InvalidPrecision

UTC = timezone.utc

UNITS = ("second", "minute", "hour", "day", "week", "month", "year")

SYMBOLS = {
    "second": "s",
    "minute": "m",
    "hour": "h",
    "day": "d",
    "week": "w",
    "month": "M",
    "year": "y",
}
_UNIT_BY_SYMBOL = {v: k for k, v in SYMBOLS.items()}

NOMINAL_SECONDS = {
    "second": 1,
    "minute": 60,
    "hour": 3600,
    "day": 86400,
    "week": 604800,
    "month": 2592000,
    "year": 31536000,
}

# count must divide the parent capacity; a count equal to it is the next unit up
_CAPACITY = {"second": (60, "minute"), "minute": (60, "hour"), "hour": (24, "day"), "month": (12, "year")}

# keyword spellings accepted by precision(**kwargs), timedelta style
_KWARG_UNITS = {
    "seconds": "second",
    "minutes": "minute",
    "hours": "hour",
    "days": "day",
    "weeks": "week",
    "months": "month",
    "years": "year",
}


@dataclass(frozen=True, order=False)
class PrecisionSpec:
    unit: str
    count: int = 1

    def __str__(self) -> str:
        return f"{self.count}{SYMBOLS[self.unit]}"

    @property
    def nominal_seconds(self) -> int:
        return nominal_duration(self)


def make_precision(unit: str, count: int = 1) -> PrecisionSpec:
    """Validate and build a precision.

    A count equal to the parent capacity (``60 s``, ``24 h``, ``12 M``) is
    normalised to one of the parent unit so equivalent grids compare equal.
    """
    if unit not in NOMINAL_SECONDS:
        raise InvalidPrecision(f"unknown unit {unit!r}")
    if isinstance(count, bool) or not isinstance(count, int) or count <= 0:
        raise InvalidCount(f"count must be a positive integer, got {count!r}")
    if unit in ("day", "week") and count != 1:
        raise InvalidCount(f"{unit} precision only supports count 1, got {count}")
    if unit in _CAPACITY:
        capacity, parent = _CAPACITY[unit]
        if capacity % count:
            raise InvalidCount(f"{count} does not divide {capacity} ({unit}s per {parent})")
        if count == capacity:
            return make_precision(parent, 1)
    return PrecisionSpec(unit, count)


def precision(**kwargs: int) -> PrecisionSpec:
    """Build a precision from a single keyword, e.g. ``precision(hours=1)``."""
    if len(kwargs) != 1:
        raise InvalidPrecision("exactly one unit keyword is required (mixed units are not supported)")
    (key, count), = kwargs.items()
    if key not in _KWARG_UNITS:
        raise InvalidPrecision(f"unknown unit keyword {key!r}")
    return make_precision(_KWARG_UNITS[key], count)


def parse_precision(text: str) -> PrecisionSpec:
    m = re.fullmatch(r"(\d+)([smhdwMy])", text.strip())
    if not m:
        raise InvalidPrecision(f"cannot parse precision {text!r}")
    return make_precision(_UNIT_BY_SYMBOL[m.group(2)], int(m.group(1)))


def nominal_duration(p: PrecisionSpec) -> int:
    """Nominal length of one grid interval in seconds (months are 30 days)."""
    return p.count * NOMINAL_SECONDS[p.unit]


def as_utc(t: datetime) -> datetime:
    if t.tzinfo is None:
        return t.replace(tzinfo=UTC)
    return t.astimezone(UTC)


def truncate(t: datetime, p: PrecisionSpec) -> datetime:
    """Return the largest grid point of ``p`` that is not after ``t``."""
    t = as_utc(t)
    midnight = t.replace(hour=0, minute=0, second=0, microsecond=0)
    unit = p.unit
    if unit in ("second", "minute", "hour"):
        step = NOMINAL_SECONDS[unit] * p.count
        sod = t.hour * 3600 + t.minute * 60 + t.second
        return midnight + timedelta(seconds=sod - sod % step)
    if unit == "day":
        return midnight
    if unit == "week":
        return midnight - timedelta(days=midnight.weekday())
    if unit == "month":
        month = (t.month - 1) // p.count * p.count + 1
        return midnight.replace(month=month, day=1)
    year = t.year // p.count * p.count
    if year < 1:
        raise InvalidCount(f"year grid of {p.count} has no point at or before {t.year}")
    return midnight.replace(year=year, month=1, day=1)


_TS_RE = re.compile(
    r"(\d{4}-\d{2}-\d{2})[T ](\d{2}:\d{2})(?::(\d{2})(?:\.(\d{1,6}))?)?\s*(Z|[+-]\d{2}:\d{2})?"
)


def parse_timestamp(text: str) -> datetime:
    """Parse an RFC 3339 style timestamp; a missing offset means UTC."""
    m = _TS_RE.fullmatch(text.strip())
    if not m:
        raise ValueError(f"cannot parse timestamp {text!r}")
    date, hm, sec, frac, tz = m.groups()
    iso = f"{date}T{hm}:{sec or '00'}.{(frac or '').ljust(6, '0')}"
    if tz and tz != "Z":
        iso += tz
    return as_utc(datetime.fromisoformat(iso))


def format_timestamp(t: datetime) -> str:
    """Serialise as UTC with exactly six fractional digits."""
    t = as_utc(t)
    return f"{t.year:04d}-{t.month:02d}-{t.day:02d}T{t.hour:02d}:{t.minute:02d}:{t.second:02d}.{t.microsecond:06d}Z"
