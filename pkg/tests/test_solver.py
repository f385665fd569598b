import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from nswlab.core import (
    Allocation,
    AllocationError,
    Instance,
    compare,
    nsw_product,
)
from nswlab.graphs import min_vertex_cover, named_graph
from nswlab.reduction import (
    ReductionParams,
    build_instance,
    completeness_allocation,
    completeness_value,
)
from nswlab.solver import (
    NormalFormError,
    SearchConfig,
    SearchLimitError,
    analyze_structure,
    exact_max_nsw,
    shared_item_rule,
    normal_form_violation,
    normalize,
    product_formula,
    soundness_bound,
    verify_identities,
)

from oracle import enumerate_raw

A25 = Fraction(2, 5)


def reduced(name, k, alpha=A25):
    return build_instance(named_graph(name), ReductionParams(alpha, k))


@pytest.fixture(scope="module")
def k4_r3():
    return reduced("K4", 3)


@pytest.fixture(scope="module")
def k4_r2():
    return reduced("K4", 2)


# ---------------------------------------------------------------------------
# exact_max_nsw: frozen oracle values
# ---------------------------------------------------------------------------

# Expected optima pre-computed by the independent oracles in oracle.py
# (enumerate_interested for the K4 instances, best_value_memo for the rest).
FROZEN_OPTIMA = {
    ("K4", 3): Fraction(343, 125),
    ("K4", 2): Fraction(14, 15),
    ("K33", 3): Fraction(1),
    ("Prism", 4): Fraction(343, 125),
    ("Petersen", 6): Fraction(343, 125),
}


@pytest.mark.parametrize("name,k", [("K4", 3), ("K4", 2), ("K33", 3), ("Prism", 4)])
def test_exact_max_matches_frozen_oracle(name, k):
    r = reduced(name, k)
    alloc, value = exact_max_nsw(r.instance)
    assert value.product == FROZEN_OPTIMA[(name, k)]
    assert not normal_form_violation(r, normalize(r, alloc))


def test_single_agent_gets_everything():
    inst = Instance(("solo",), ("x", "y"), {("solo", "x"): Fraction(1)})
    alloc, value = exact_max_nsw(inst)
    assert alloc.assignment == {"x": "solo", "y": "solo"}
    assert value.product == 1


def test_forced_items_go_home(k4_r3):
    alloc, _ = exact_max_nsw(k4_r3.instance)
    for e, item in k4_r3.edge_item.items():
        assert alloc.assignment[item] == k4_r3.edge_agent[e]


def test_exact_max_deterministic_and_worker_independent():
    r = reduced("K33", 3)
    outputs = [exact_max_nsw(r.instance, SearchConfig(worker_count=w)) for w in (1, 4, 8)]
    for alloc, value in outputs[1:]:
        assert alloc.assignment == outputs[0][0].assignment
        assert value == outputs[0][1]


def test_lexicographic_among_identical_items(k4_r3):
    # vertex items are identical; the lex-smallest optimum hands them out in
    # nondecreasing agent order starting from the lowest-index cover
    alloc, _ = exact_max_nsw(k4_r3.instance)
    takers = [alloc.assignment[i] for i in k4_r3.vertex_items]
    assert takers == sorted(takers)
    assert takers == ["v:0", "v:1", "v:2"]


def test_item_limit_enforced():
    r = reduced("Petersen", 6)
    with pytest.raises(SearchLimitError, match="choice points"):
        exact_max_nsw(r.instance, SearchConfig(item_limit=10))


def test_time_limit_enforced():
    r = reduced("Petersen", 6)
    with pytest.raises(SearchLimitError, match="time limit"):
        exact_max_nsw(r.instance, SearchConfig(time_limit=0.05))


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(item_limit=0)
    with pytest.raises(ValueError):
        SearchConfig(worker_count=0)
    with pytest.raises(ValueError):
        SearchConfig(time_limit=-1)


# ---------------------------------------------------------------------------
# exact_max_nsw vs raw enumeration on micro instances
# ---------------------------------------------------------------------------

_micro_values = st.sampled_from(
    [Fraction(0), Fraction(0), Fraction(1), Fraction(2), Fraction(1, 2), Fraction(1, 3), Fraction(3)]
)


@st.composite
def micro_instances(draw):
    n = draw(st.integers(1, 3))
    m = draw(st.integers(1, 5))
    agents = tuple(f"a{i}" for i in range(n))
    items = tuple(f"i{j}" for j in range(m))
    utilities = {}
    for a in agents:
        for i in items:
            v = draw(_micro_values)
            if v:
                utilities[(a, i)] = v
    return Instance(agents, items, utilities)


@given(micro_instances())
@settings(max_examples=120, deadline=None)
def test_exact_max_agrees_with_raw_enumeration(inst):
    raw_alloc, raw_value = enumerate_raw(inst)
    alloc, value = exact_max_nsw(inst)
    assert value.product == raw_value.product
    assert value.zero_agents == raw_value.zero_agents
    assert value.positive_product == raw_value.positive_product
    # both sides return the lexicographically first optimum
    assert alloc.assignment == raw_alloc.assignment


# ---------------------------------------------------------------------------
# white-box: pruning bounds are true upper bounds
# ---------------------------------------------------------------------------

def test_bounds_dominate_exact_suffix_values():
    import math

    from nswlab.solver import _Search

    for name, k in (("K4", 3), ("K33", 3)):
        r = reduced(name, k)
        search = _Search(r.instance, SearchConfig())
        state0 = tuple(search.base[a] for a in search.live[0])
        for choice in search._children(0):
            fold, nxt = search._apply(0, state0, choice)
            exact = search._solve(1, nxt)
            if exact[0] != 0:
                continue
            true_log = math.log(exact[1])
            assert search._bound_log(1, nxt) >= true_log - 1e-9
            assert search._bound_log_refined(1, nxt) >= true_log - 1e-9


# ---------------------------------------------------------------------------
# shared_item_rule cascade
# ---------------------------------------------------------------------------

def test_rule1_vertex_item_holder(k4_r3):
    alloc = completeness_allocation(k4_r3, [0, 1, 2])
    rule, target = shared_item_rule(k4_r3, alloc, (0, (0, 1)))
    assert rule == 1
    assert target == "e:0-1"


def _manual_k4_k2(r):
    # vertex items on v:0 and v:1, edge items home, every shared item with
    # its vertex agent
    alloc = {}
    for item, v in zip(r.vertex_items, (0, 1)):
        alloc[item] = r.vertex_agent[v]
    for e, item in r.edge_item.items():
        alloc[item] = r.edge_agent[e]
    for (v, e), item in r.shared_item.items():
        alloc[item] = r.vertex_agent[v]
    return alloc


def test_rule2_edge_agent_holding_other_share(k4_r2):
    # vertex 2 holds no vertex item; a(2-3) holds the edge's other shared item
    alloc = _manual_k4_k2(k4_r2)
    alloc[k4_r2.shared_item[(3, (2, 3))]] = k4_r2.edge_agent[(2, 3)]
    rule, target = shared_item_rule(k4_r2, Allocation(alloc), (2, (2, 3)))
    assert rule == 2
    assert target == "v:2"


def test_rule3_vertex_agent_holding_both_others(k4_r2):
    # vertex 2 off-cover holds all three shared items; a(2-3) holds no other
    alloc = _manual_k4_k2(k4_r2)
    rule, target = shared_item_rule(k4_r2, Allocation(alloc), (2, (2, 3)))
    assert rule == 3
    assert target == "e:2-3"


def test_rule4_default(k4_r2):
    # vertex 2 keeps only one other shared item
    alloc = _manual_k4_k2(k4_r2)
    alloc[k4_r2.shared_item[(2, (0, 2))]] = k4_r2.edge_agent[(0, 2)]
    alloc[k4_r2.shared_item[(2, (2, 3))]] = k4_r2.edge_agent[(2, 3)]
    rule, target = shared_item_rule(k4_r2, Allocation(alloc), (2, (2, 3)))
    assert rule == 4
    assert target == "v:2"


# ---------------------------------------------------------------------------
# normalize
# ---------------------------------------------------------------------------

def test_normalize_fixpoint_on_completeness(k4_r3):
    alloc = completeness_allocation(k4_r3, [0, 1, 2])
    assert normal_form_violation(k4_r3, alloc) is None
    assert normalize(k4_r3, alloc).assignment == alloc.assignment


def test_normalize_rebalances_vertex_items(k4_r3):
    alloc = dict(completeness_allocation(k4_r3, [0, 1, 2]).assignment)
    # pile two vertex items on v:0, leaving v:1 with none
    alloc["vi:1"] = "v:0"
    before = nsw_product(k4_r3.instance, Allocation(alloc))
    result = normalize(k4_r3, Allocation(alloc))
    after = nsw_product(k4_r3.instance, result)
    counts = {}
    for item in k4_r3.vertex_items:
        counts[result.assignment[item]] = counts.get(result.assignment[item], 0) + 1
    assert all(c == 1 for c in counts.values())
    assert compare(after, before) >= 0


def test_normalize_moves_shared_item_off_vertex_item_holder(k4_r3):
    alloc = dict(completeness_allocation(k4_r3, [0, 1, 2]).assignment)
    item = k4_r3.shared_item[(0, (0, 1))]
    alloc[item] = "v:0"  # rule 1 violation: v:0 holds a vertex item
    before = nsw_product(k4_r3.instance, Allocation(alloc))
    result = normalize(k4_r3, Allocation(alloc))
    after = nsw_product(k4_r3.instance, result)
    assert result.assignment[item] == "e:0-1"
    assert compare(after, before) > 0


def test_normalize_monotone_on_random_allocations():
    rng = random.Random(20250810)
    for name, k in (("K4", 3), ("K33", 3)):
        r = reduced(name, k)
        agents = r.instance.agents
        for _ in range(200):
            alloc = Allocation({item: rng.choice(agents) for item in r.instance.items})
            before = nsw_product(r.instance, alloc)
            result = normalize(r, alloc)
            after = nsw_product(r.instance, result)
            assert compare(after, before) >= 0
            assert normal_form_violation(r, result) is None
            # fixpoint: renormalizing changes nothing
            assert normalize(r, result).assignment == result.assignment


def test_normalize_boundary_alpha_terminates():
    rng = random.Random(7)
    for alpha in (Fraction(1, 3), Fraction(1, 2)):
        r = build_instance(named_graph("K4"), ReductionParams(alpha, 3, allow_boundary=True))
        for _ in range(50):
            alloc = Allocation({item: rng.choice(r.instance.agents) for item in r.instance.items})
            before = nsw_product(r.instance, alloc)
            result = normalize(r, alloc)
            assert compare(nsw_product(r.instance, result), before) >= 0
            assert normal_form_violation(r, result) is None


def test_normalize_handles_k_zero():
    r = reduced("K4", 0)
    rng = random.Random(3)
    alloc = Allocation({item: rng.choice(r.instance.agents) for item in r.instance.items})
    result = normalize(r, alloc)
    assert normal_form_violation(r, result) is None
    profile = analyze_structure(r, result)
    assert profile.C == frozenset()


def test_normalize_rejects_foreign_allocation(k4_r3):
    with pytest.raises(AllocationError):
        normalize(k4_r3, Allocation({"nope": "v:0"}))


# ---------------------------------------------------------------------------
# analyze_structure + identities
# ---------------------------------------------------------------------------

def test_analyze_k4_k3_profile(k4_r3):
    alloc, value = exact_max_nsw(k4_r3.instance)
    profile = analyze_structure(k4_r3, normalize(k4_r3, alloc))
    assert sorted(profile.C) == [0, 1, 2]
    assert sorted(profile.I3) == [3]
    assert not profile.I2
    assert len(profile.E2) == 3
    assert len(profile.E1C) + len(profile.E1I) == 3
    assert not profile.E0
    assert profile.t == 3
    report = verify_identities(k4_r3, profile)
    assert report.all_ok
    assert product_formula(profile, A25).product == value.product


def test_analyze_k4_k2_profile(k4_r2):
    alloc, value = exact_max_nsw(k4_r2.instance)
    profile = analyze_structure(k4_r2, normalize(k4_r2, alloc))
    assert len(profile.I2) == 1
    assert len(profile.E0) == 0
    assert len(profile.E2) == 1
    assert verify_identities(k4_r2, profile).all_ok
    assert product_formula(profile, A25).product == value.product == Fraction(14, 15)


def test_analyze_k33_profile():
    r = reduced("K33", 3)
    alloc, value = exact_max_nsw(r.instance)
    profile = analyze_structure(r, normalize(r, alloc))
    assert not profile.I2
    assert not profile.E0
    assert len(profile.E2) == 0
    assert verify_identities(r, profile).all_ok
    assert product_formula(profile, A25).product == 1


def test_analyze_rejects_non_fixpoint(k4_r3):
    alloc = dict(completeness_allocation(k4_r3, [0, 1, 2]).assignment)
    alloc[k4_r3.shared_item[(0, (0, 1))]] = "v:0"
    with pytest.raises(NormalFormError, match="rule 1"):
        analyze_structure(k4_r3, Allocation(alloc))


def test_identities_fail_on_fabricated_profile(k4_r3):
    alloc, _ = exact_max_nsw(k4_r3.instance)
    profile = analyze_structure(k4_r3, normalize(k4_r3, alloc))
    from dataclasses import replace

    # move an E1 edge into E2: the shared-item count identity must break
    fake = replace(profile, E2=profile.E2 + profile.E1C[:1], E1C=profile.E1C[1:])
    report = verify_identities(k4_r3, fake)
    assert not report.all_ok
    broken = {c.name for c in report.checks if not c.ok}
    assert "shared-item-count" in broken


def test_profile_serialization(k4_r3):
    alloc, _ = exact_max_nsw(k4_r3.instance)
    profile = analyze_structure(k4_r3, normalize(k4_r3, alloc))
    d = profile.to_dict()
    assert d["C"] == [0, 1, 2]
    assert d["t"] == 3
    report = verify_identities(k4_r3, profile).to_dict()
    assert report["all_ok"] is True
    assert all(isinstance(c["ok"], bool) for c in report["checks"])


# ---------------------------------------------------------------------------
# soundness bound
# ---------------------------------------------------------------------------

def test_soundness_bound_values():
    k4 = named_graph("K4")
    assert soundness_bound(k4, 2, A25).product == Fraction(14, 15)
    assert soundness_bound(k4, 3, A25).product == Fraction(343, 125)
    assert soundness_bound(named_graph("Petersen"), 5, A25).product == Fraction(14, 15)


def test_soundness_bound_dominates_exact_optimum():
    for name, k in (("K4", 3), ("K4", 2), ("K33", 3), ("Prism", 4)):
        g = named_graph(name)
        r = reduced(name, k)
        _, value = exact_max_nsw(r.instance)
        bound = soundness_bound(g, k, A25)
        assert compare(value, bound) <= 0


def test_bound_equals_completeness_iff_cover_exists():
    for name in ("K4", "K33", "Prism"):
        g = named_graph(name)
        tau = len(min_vertex_cover(g))
        r = reduced(name, tau)
        _, value = exact_max_nsw(r.instance)
        assert value.product == completeness_value(g, tau, A25).product
        # one item short of a cover: strictly below the completeness formula
        if 3 * (tau - 1) >= g.edge_count:
            r2 = reduced(name, tau - 1)
            _, v2 = exact_max_nsw(r2.instance)
            assert v2.product < completeness_value(g, tau - 1, A25).product
