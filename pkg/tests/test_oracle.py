"""Cross-checks between the independent oracles and the production solver.

The oracles in oracle.py were the pre-build source of every frozen optimum;
these tests keep them honest against each other and against the solver.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from nswlab.core import Instance
from nswlab.graphs import named_graph
from nswlab.reduction import ReductionParams, build_instance
from nswlab.solver import exact_max_nsw

from oracle import best_value_memo, enumerate_interested, enumerate_raw

A25 = Fraction(2, 5)

_values = st.sampled_from(
    [Fraction(0), Fraction(0), Fraction(1), Fraction(2), Fraction(1, 2), Fraction(1, 3)]
)


@st.composite
def tiny_instances(draw):
    n = draw(st.integers(1, 3))
    m = draw(st.integers(1, 4))
    agents = tuple(f"a{i}" for i in range(n))
    items = tuple(f"i{j}" for j in range(m))
    utilities = {}
    for a in agents:
        for i in items:
            v = draw(_values)
            if v:
                utilities[(a, i)] = v
    return Instance(agents, items, utilities)


@given(tiny_instances())
@settings(max_examples=100, deadline=None)
def test_oracles_agree_on_tiny_instances(inst):
    raw_alloc, raw_value = enumerate_raw(inst)
    int_alloc, int_value = enumerate_interested(inst)
    memo_value = best_value_memo(inst)
    assert int_value.product == raw_value.product
    assert int_value.zero_agents == raw_value.zero_agents
    assert int_value.positive_product == raw_value.positive_product
    assert int_alloc.assignment == raw_alloc.assignment
    assert memo_value.product == raw_value.product
    assert memo_value.zero_agents == raw_value.zero_agents
    assert memo_value.positive_product == raw_value.positive_product


def _reduced(name, k):
    return build_instance(named_graph(name), ReductionParams(A25, k))


def test_memo_oracle_matches_enumeration_on_k4():
    r = _reduced("K4", 2)
    _, enumerated = enumerate_interested(r.instance)
    memoized = best_value_memo(r.instance)
    assert enumerated.product == memoized.product == Fraction(14, 15)


@pytest.mark.parametrize(
    "name,k,expected",
    [
        ("K4", 3, Fraction(343, 125)),
        ("K4", 2, Fraction(14, 15)),
        ("K33", 3, Fraction(1)),
        ("Prism", 4, Fraction(343, 125)),
    ],
)
def test_memo_oracle_reproduces_frozen_optima(name, k, expected):
    assert best_value_memo(_reduced(name, k).instance).product == expected


def test_memo_oracle_agrees_with_solver_on_named():
    for name, k in (("K4", 3), ("K33", 3), ("Prism", 4)):
        r = _reduced(name, k)
        _, value = exact_max_nsw(r.instance)
        assert best_value_memo(r.instance).product == value.product


@pytest.mark.slow
def test_memo_oracle_petersen():
    # ~10 s: the big pre-verification run behind the frozen (7/5)^3
    r = _reduced("Petersen", 6)
    assert best_value_memo(r.instance).product == Fraction(343, 125)
