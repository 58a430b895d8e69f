"""Exception hierarchy.

Every error carries a short ``code`` naming the violated condition; the CLI
prints it and maps the class to an exit status.
"""

from __future__ import annotations


class DateminError(Exception):
    code = "error"

    def __init__(self, message: str = "") -> None:
        super().__init__(message or self.code)

    def __str__(self) -> str:
        msg = super().__str__()
        return msg if msg.startswith(self.code) else f"{self.code}: {msg}"


class ValidationError(DateminError, ValueError):
    code = "invalid"


class InvalidCount(ValidationError):
    code = "invalid-count"


class InvalidPrecision(ValidationError):
    code = "invalid-precision"


class EmptyLabel(ValidationError):
    code = "empty-label"


class PolicyError(ValidationError):
    code = "invalid-policy"


class NonMonotonicPrecision(PolicyError):
    code = "non-monotonic-precision"


class NonMonotonicOffset(PolicyError):
    code = "non-monotonic-offset"


class StepExceedsNextOffset(PolicyError):
    code = "step-exceeds-next-offset"


class CounterOverflow(ValidationError):
    code = "counter-overflow"


class OutOfOrderInsertion(ValidationError):
    code = "out-of-order-insertion"


class UnknownKind(ValidationError):
    code = "unknown-kind"


class EmptyMix(ValidationError):
    code = "empty-mix"


class StoreError(DateminError):
    code = "store-error"


class StoreIO(StoreError):
    code = "store-io"


class StoreLocked(StoreError):
    code = "store-locked"


class CorruptStore(StoreError):
    code = "corrupt-store"


class CorruptQueue(CorruptStore):
    code = "corrupt-queue"


class VersionMismatch(StoreError):
    code = "version-mismatch"


class ReadOnlyStore(StoreError):
    code = "read-only-store"


class UnknownOwner(StoreError):
    code = "unknown-owner"


class UnknownItem(StoreError):
    code = "unknown-item"


class UnknownModel(ValidationError):
    code = "unknown-model"
