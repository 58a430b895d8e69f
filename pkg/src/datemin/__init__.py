"""Data-minimising replacements for timestamp fields.

Rough dates truncate once, ordering dates replace timestamps with
per-context counters, vanishing dates lose precision step by step, and the
hybrid variants keep insertion order inside the sub-second digits.
"""

from .costmodel import field_cost, scenario_cost
from .hybrid import HybridFieldDef, assign_hybrid, create_hybrid_vanishing, hybrid_reduce
from .ordering import context_key, next_count
from .precision import (
    PrecisionSpec,
    format_timestamp,
    make_precision,
    nominal_duration,
    parse_precision,
    parse_timestamp,
    precision,
    truncate,
)
from .records import (
    Field,
    Record,
    create_record,
    declare_model,
    delete_record,
    hybrid_field,
    ordering_field,
    plain_field,
    rough_field,
    save_record,
    vanishing_field,
)
from .rough import RoughFieldDef, rough_capture
from .store import Store, open_store, seeded_ids
from .vanishing import (
    Owner,
    ReductionReport,
    VanishingPolicy,
    VanishingStep,
    create_vanishing,
    delete_item,
    delete_owner,
    make_policy,
    reduce_due,
    step,
)

__all__ = [name for name in dir() if not name.startswith("_")]
