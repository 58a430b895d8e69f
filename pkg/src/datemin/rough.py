"""Rough dates: timestamps truncated once, when they are persisted."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

from .errors import ValidationError
from .precision import PrecisionSpec, truncate

CAPTURE_MODES = ("manual", "on_create", "on_save")


@dataclass(frozen=True)
class RoughFieldDef:
    spec: PrecisionSpec
    capture_mode: str = "manual"

    def __post_init__(self) -> None:
        # no default precision on purpose: callers must pick one
        if not isinstance(self.spec, PrecisionSpec):
            raise ValidationError("rough fields require an explicit precision")
        if self.capture_mode not in CAPTURE_MODES:
            raise ValidationError(f"unknown capture mode {self.capture_mode!r}")


def rough_capture(field: RoughFieldDef, raw: datetime) -> datetime:
    return truncate(raw, field.spec)
