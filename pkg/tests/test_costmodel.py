from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from datemin import field_cost, scenario_cost
from datemin.costmodel import (
    AUX_COSTS,
    FIELD_COSTS,
    TAIGA_REPLACEMENTS,
    UUID_BYTES,
    factor,
    taiga_mix,
)
from datemin.errors import EmptyMix, UnknownKind


@pytest.mark.parametrize(
    "kind,cost,ratio",
    [("vanishing", 138, Fraction(69, 4)), ("ordering", 4, Fraction(1, 2)), ("rough", 8, 1), ("plain", 8, 1), ("hybrid", 138, Fraction(69, 4))],
)
def test_field_costs(kind, cost, ratio):
    assert field_cost(kind) == cost
    assert factor(kind) == ratio


def test_vanishing_breakdown():
    assert 3 * UUID_BYTES + 2 * AUX_COSTS["date"] + 2 * AUX_COSTS["int"] == 138
    assert AUX_COSTS["context"] == 44
    assert float(factor("vanishing")) == 17.25


def test_unknown_kind_and_aliases():
    with pytest.raises(UnknownKind):
        field_cost("sundial")
    assert field_cost("VD+O") == field_cost("hybrid")
    assert field_cost("RD") == 8


def test_taiga_scenario():
    assert len(TAIGA_REPLACEMENTS) == 18
    assert dict(taiga_mix()) == {"rough": 10, "ordering": 3, "vanishing": 2, "hybrid": 3}
    # independent sum over the table rows
    total = sum({"rough": 8, "ordering": 4, "vanishing": 138, "hybrid": 138}[k] for _, _, k in TAIGA_REPLACEMENTS)
    assert total == 782
    result = scenario_cost(taiga_mix())
    assert result.total == 782 and result.fields == 18
    assert result.average == Fraction(782, 18)
    assert result.factor == Fraction(782, 18 * 8)
    assert 5.0 <= float(result.factor) <= 6.0
    assert round(float(result.factor), 2) == 5.43


def test_single_field_scenarios():
    assert scenario_cost([("plain", 1)]).factor == 1
    assert scenario_cost([("vanishing", 1)]).factor == Fraction(69, 4)


def test_empty_mix():
    with pytest.raises(EmptyMix):
        scenario_cost([])
    with pytest.raises(EmptyMix):
        scenario_cost([("rough", 0)])


mixes = st.lists(st.tuples(st.sampled_from(sorted(FIELD_COSTS)), st.integers(0, 50)), min_size=1, max_size=6)


@given(mixes, mixes)
def test_totals_are_additive(a, b):
    if sum(c for _, c in a) == 0 or sum(c for _, c in b) == 0:
        return
    assert scenario_cost(a + b).total == scenario_cost(a).total + scenario_cost(b).total
