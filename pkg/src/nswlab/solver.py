"""Exact welfare maximization, allocation normalization, and soundness analysis.

The exact search enumerates every undominated assignment: items with a
single positively-interested agent are forced there first, identical item
groups are assigned as nondecreasing agent multisets, and the remaining
choices run through a memoized suffix maximization in instance item order.
Subtrees are skipped only when a provable upper bound says they cannot beat
an exactly-evaluated sibling, so the returned maximum is exact.  A second
pass reconstructs the lexicographically smallest optimal assignment.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Iterable

from .core import (
    Allocation,
    AllocationError,
    Instance,
    WelfareValue,
    nsw_product,
    validate,
)
from .graphs import Edge, Graph, min_vertex_cover
from .reduction import ReducedInstance, ReductionError

__all__ = [
    "SearchConfig",
    "SearchLimitError",
    "NormalFormError",
    "StructureProfile",
    "CheckResult",
    "IdentityReport",
    "exact_max_nsw",
    "normalize",
    "shared_item_rule",
    "normal_form_violation",
    "analyze_structure",
    "verify_identities",
    "product_formula",
    "soundness_bound",
]

# Safety margin for float-log bound comparisons; exact integer comparisons
# decide all value updates, floats only ever *skip* provably-worse branches.
_LOG_EPS = 1e-9


class SearchLimitError(RuntimeError):
    """Search space or time limit exceeded."""

    def __init__(self, message: str, best_product: Fraction | None = None):
        super().__init__(message)
        self.best_product = best_product


class NormalFormError(ValueError):
    """An allocation violates the normal-form rules."""


@dataclass(frozen=True)
class SearchConfig:
    """Limits for the exact search.

    ``item_limit`` caps the number of undetermined item choice points after
    preprocessing.  ``worker_count`` is accepted for interface compatibility;
    results never depend on it.  ``time_limit`` is in seconds.
    """

    item_limit: int = 64
    worker_count: int = 1
    time_limit: float | None = None

    def __post_init__(self) -> None:
        if self.item_limit <= 0:
            raise ValueError("item_limit must be positive")
        if self.worker_count <= 0:
            raise ValueError("worker_count must be positive")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")


# A search value is (zero_agents, positive_part) with positive_part the
# product of the scaled nonzero agent totals.  Order: any all-positive value
# beats any zero value; among zero values fewer zeros win, then the larger
# positive part.  The order is total and compatible with composition.
_Value = tuple[int, int]

_UNIT_VALUE: _Value = (0, 1)


def _combine(a: _Value, b: _Value) -> _Value:
    return (a[0] + b[0], a[1] * b[1])


def _value_better(a: _Value, b: _Value) -> bool:
    if a[0] != b[0]:
        if a[0] == 0 or b[0] == 0:
            return a[0] == 0
        return a[0] < b[0]
    return a[1] > b[1]


class _Unit:
    """A maximal group of remaining items with identical utility columns."""

    __slots__ = ("items", "interested", "util")

    def __init__(self, items: list[int], interested: tuple[int, ...], util: dict[int, int]):
        self.items = items
        self.interested = interested
        self.util = util


class _Search:
    def __init__(self, instance: Instance, config: SearchConfig):
        self.instance = instance
        self.config = config
        self.deadline = None if config.time_limit is None else time.monotonic() + config.time_limit
        agents = instance.agents
        self.n = len(agents)
        agent_pos = {a: i for i, a in enumerate(agents)}
        # common denominator so every agent total is an exact integer
        scale = 1
        for value in instance.utilities.values():
            scale = scale * value.denominator // math.gcd(scale, value.denominator)
        self.scale = scale
        columns: dict[int, tuple[tuple[int, int], ...]] = {}
        for j, item in enumerate(instance.items):
            col = tuple(
                (agent_pos[a], int(instance.utilities[(a, item)] * scale))
                for a in instance.interested_agents(item)
            )
            columns[j] = col
        self.base = [0] * self.n
        self.forced: dict[int, int] = {}  # item index -> agent index
        grouped: dict[tuple[tuple[int, int], ...], list[int]] = {}
        for j in range(len(instance.items)):
            col = columns[j]
            if len(col) == 0:
                self.forced[j] = 0  # worthless to everyone; first agent takes it
            elif len(col) == 1:
                a, u = col[0]
                self.forced[j] = a
                self.base[a] += u
            else:
                grouped.setdefault(col, []).append(j)
        units = [
            _Unit(items, tuple(a for a, _ in col), dict(col))
            for col, items in sorted(grouped.items(), key=lambda kv: kv[1][0])
        ]
        self.units = units
        choice_points = sum(len(u.items) for u in units)
        if choice_points > config.item_limit:
            raise SearchLimitError(
                f"search needs {choice_points} item choice points, above the "
                f"item_limit of {config.item_limit}"
            )
        for unit in units:
            width = math.comb(len(unit.interested) + len(unit.items) - 1, len(unit.items))
            if width > 1_000_000:
                raise SearchLimitError(
                    f"an identical-item group of {len(unit.items)} items over "
                    f"{len(unit.interested)} agents expands to {width} assignments"
                )
        nu = len(units)
        last = [-1] * self.n
        for t, unit in enumerate(units):
            for a in unit.interested:
                last[a] = t
        self.last = last
        # live[t]: agents whose final totals are still undecided at unit t
        self.live: list[tuple[int, ...]] = [
            tuple(a for a in range(self.n) if last[a] >= t) for t in range(nu + 1)
        ]
        self.pos_in: list[dict[int, int]] = [
            {a: i for i, a in enumerate(liv)} for liv in self.live
        ]
        self.fold_at: list[tuple[int, ...]] = [
            tuple(a for a in range(self.n) if last[a] == t) for t in range(nu)
        ]
        # pot[t][a]: total scaled utility agent a could still gain from units t..
        pot = [[0] * self.n for _ in range(nu + 1)]
        for t in range(nu - 1, -1, -1):
            row = pot[t + 1][:]
            unit = units[t]
            for a in unit.interested:
                row[a] += unit.util[a] * len(unit.items)
            pot[t] = row
        self.pot = pot
        self.memo: dict[tuple[int, tuple[int, ...]], _Value] = {}
        self._cand_cache: dict[tuple[int, int], tuple[tuple[float, float], ...]] = {}
        self._cheap_cache: dict[tuple[int, tuple[int, ...]], float] = {}
        self._refined_cache: dict[tuple[int, tuple[int, ...]], float] = {}

    # -- bounding ----------------------------------------------------------
    #
    # Every bound below over-approximates ln(positive part) of any completion
    # in which all still-live agents end positive; completions where a live
    # agent ends at zero lose the zero-count comparison outright, so they
    # never need the log.  Each agent factor ln(w + G) (G = scaled utility it
    # still collects) is replaced by a tangent line A + gamma*G; an item then
    # pays the steepest line slope among its interested agents, which makes
    # the relaxation separable per item.

    def _candidates(self, cur: int, g: int) -> tuple[tuple[float, float], ...]:
        """Valid (intercept, slope) lines over-approximating ln(cur + G), G in [0, g].

        Index 0 is the flat caps line; the rest are tangents at a grid of
        fill levels.  Cached: states revisit the same (cur, g) pairs heavily.
        """
        key = (cur, g)
        hit = self._cand_cache.get(key)
        if hit is not None:
            return hit
        options = [(math.log(cur + g), 0.0)]
        for theta in (0.125, 0.25, 0.5, 0.75, 1.0):
            tg = theta * g
            options.append((math.log(cur + tg) - tg / (cur + tg), 1.0 / (cur + tg)))
        out = tuple(options)
        self._cand_cache[key] = out
        return out

    def _bound_log(self, t: int, state: tuple[int, ...]) -> float:
        """Cheap bound: best single policy over {caps, three tangent levels}."""
        cached = self._cheap_cache.get((t, state))
        if cached is not None:
            return cached
        live = self.live[t]
        pot = self.pot[t]
        units = self.units
        nu = len(units)
        per_agent: list[tuple[int, tuple[tuple[float, float], ...]]] = []
        fixed = 0.0
        for a, cur in zip(live, state):
            g = pot[a]
            if g == 0:
                if cur > 0:
                    fixed += math.log(cur)
                continue
            per_agent.append((a, self._candidates(cur, g)))
        best = math.inf
        for c in (0, 5, 3, 1):  # caps, tangent at g, g/2, g/8
            gamma: dict[int, float] = {}
            base = fixed
            for a, options in per_agent:
                base += options[c][0]
                gamma[a] = options[c][1]
            credits = 0.0
            if c:
                for idx in range(t, nu):
                    unit = units[idx]
                    cbest = 0.0
                    for a in unit.interested:
                        rate = gamma[a] * unit.util[a]
                        if rate > cbest:
                            cbest = rate
                    credits += cbest * len(unit.items)
            if base + credits < best:
                best = base + credits
        self._cheap_cache[(t, state)] = best
        return best

    def _bound_log_refined(self, t: int, state: tuple[int, ...]) -> float:
        """Tighter bound: per-agent tangent lines picked by coordinate descent.

        Per undecided item the credit is the max line slope times utility
        over its interested agents; keeping the best and second-best rate
        per item makes a candidate trial O(1).
        """
        cached = self._refined_cache.get((t, state))
        if cached is not None:
            return cached
        live = self.live[t]
        pot = self.pot[t]
        units = self.units
        nu = len(units)
        agents: list[int] = []
        cands: dict[int, tuple[tuple[float, float], ...]] = {}
        fixed = 0.0
        for a, cur in zip(live, state):
            g = pot[a]
            if g == 0:
                if cur > 0:
                    fixed += math.log(cur)
                continue
            agents.append(a)
            cands[a] = self._candidates(cur, g)
        # start from the mid tangent: the all-flat start is a local minimum
        # (flat caps already price in the agent's own items)
        choice = {a: 3 for a in agents}
        rate = {a: cands[a][3][1] for a in agents}
        suffix = range(t, nu)
        # per unit: [count, [(agent, util)...], best rate, best agent, second rate]
        table: dict[int, list] = {}
        for idx in suffix:
            unit = units[idx]
            pairs = [(a, unit.util[a]) for a in unit.interested]
            best_r = second_r = 0.0
            best_a = -1
            for a, u in pairs:
                r = rate[a] * u
                if r > best_r:
                    second_r = best_r
                    best_r, best_a = r, a
                elif r > second_r:
                    second_r = r
            table[idx] = [len(unit.items), pairs, best_r, best_a, second_r]

        my_util: dict[int, list[tuple[int, int, int]]] = {a: [] for a in agents}
        for idx in suffix:
            entry = table[idx]
            for aa, u in entry[1]:
                my_util[aa].append((idx, u, entry[0]))
        for _sweep in range(2):
            improved = False
            for a in agents:
                opts = cands[a]
                cur_c = choice[a]
                # the competing rate per touched item does not depend on a's line
                rows = []
                cur_total = opts[cur_c][0]
                for idx, u, count in my_util[a]:
                    entry = table[idx]
                    other = entry[4] if entry[3] == a else entry[2]
                    rows.append((u, count, other))
                    cur_total += entry[2] * entry[0]
                best_c, best_total = cur_c, cur_total
                for c in range(len(opts)):
                    if c == cur_c:
                        continue
                    total = opts[c][0]
                    slope = opts[c][1]
                    for u, count, other in rows:
                        mine = slope * u
                        total += (mine if mine > other else other) * count
                    if total < best_total - 1e-12:
                        best_c, best_total = c, total
                if best_c != cur_c:
                    choice[a] = best_c
                    rate[a] = opts[best_c][1]
                    for idx, _u, _count in my_util[a]:
                        entry = table[idx]
                        best_r = second_r = 0.0
                        best_a = -1
                        for aa, u in entry[1]:
                            r = rate[aa] * u
                            if r > best_r:
                                second_r = best_r
                                best_r, best_a = r, aa
                            elif r > second_r:
                                second_r = r
                        entry[2], entry[3], entry[4] = best_r, best_a, second_r
                    improved = True
            if not improved:
                break
        total = fixed
        for a in agents:
            total += cands[a][choice[a]][0]
        for idx in suffix:
            total += table[idx][2] * table[idx][0]
        self._refined_cache[(t, state)] = total
        return total

    @staticmethod
    def _prunable(fold: _Value, bound_log: float, best: _Value, best_log: float) -> bool:
        """May the child (optimistic value = fold + all-positive bound) be skipped?"""
        if fold[0] != best[0]:
            if fold[0] == 0 or best[0] == 0:
                return best[0] == 0
            return fold[0] > best[0]
        opt_log = (math.log(fold[1]) if fold[1] > 1 else 0.0) + bound_log
        return opt_log < best_log - _LOG_EPS

    # -- exact suffix maximization ------------------------------------------

    def _children(self, t: int) -> Iterable[tuple[int, ...]]:
        unit = self.units[t]
        return combinations_with_replacement(unit.interested, len(unit.items))

    def _apply(self, t: int, state: tuple[int, ...], choice: tuple[int, ...]):
        """Assign unit t per ``choice``; fold finished agents; project the state."""
        pos = self.pos_in[t]
        bumped = list(state)
        unit = self.units[t]
        for a in choice:
            bumped[pos[a]] += unit.util[a]
        zeros = 0
        prod = 1
        for a in self.fold_at[t]:
            total = bumped[pos[a]]
            if total == 0:
                zeros += 1
            else:
                prod *= total
        next_state = tuple(bumped[pos[a]] for a in self.live[t + 1])
        return (zeros, prod), next_state

    def _solve(self, t: int, state: tuple[int, ...]) -> _Value:
        if t == len(self.units):
            return _UNIT_VALUE
        key = (t, state)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _Timeout()
        ranked = []
        for choice in self._children(t):
            fold, nxt = self._apply(t, state, choice)
            blog = self._bound_log(t + 1, nxt)
            opt = (math.log(fold[1]) if fold[1] > 1 else 0.0) + blog
            ranked.append((fold, nxt, blog, opt))
        # most promising first, so the local best prunes aggressively
        ranked.sort(key=lambda r: (r[0][0], -r[3]))
        best: _Value | None = None
        best_log = 0.0
        for fold, nxt, blog, _opt in ranked:
            if best is not None and self._prunable(fold, blog, best, best_log):
                continue
            if best is not None and self._prunable(
                fold, self._bound_log_refined(t + 1, nxt), best, best_log
            ):
                continue
            value = _combine(fold, self._solve(t + 1, nxt))
            if best is None or _value_better(value, best):
                best = value
                best_log = math.log(best[1]) if best[1] > 1 else 0.0
            if t == 0:
                self._root_best = best
        assert best is not None
        self.memo[key] = best
        return best

    # -- lexicographic reconstruction ----------------------------------------

    def _reconstruct(self, start_state: tuple[int, ...]) -> dict[int, int]:
        assignment = dict(self.forced)
        state = start_state
        target = self._solve(0, start_state)
        for t, unit in enumerate(self.units):
            target_log = math.log(target[1]) if target[1] > 1 else 0.0
            chosen = None
            for choice in self._children(t):  # lexicographic order
                fold, nxt = self._apply(t, state, choice)
                if self._prunable(fold, self._bound_log(t + 1, nxt), target, target_log):
                    continue
                if self._prunable(
                    fold, self._bound_log_refined(t + 1, nxt), target, target_log
                ):
                    continue
                suffix = self._solve(t + 1, nxt)
                if _combine(fold, suffix) == target:
                    chosen = (choice, nxt, suffix)
                    break
            if chosen is None:
                raise RuntimeError("internal error: optimal suffix not reproducible")
            choice, state, target = chosen
            for item, agent in zip(unit.items, choice):
                assignment[item] = agent
        return assignment

    def run(self) -> tuple[Allocation, WelfareValue]:
        self._root_best: _Value | None = None
        start_state = tuple(self.base[a] for a in self.live[0])
        prefold_zeros = 0
        prefold_prod = 1
        for a in range(self.n):
            if self.last[a] == -1:
                if self.base[a] == 0:
                    prefold_zeros += 1
                else:
                    prefold_prod *= self.base[a]
        try:
            suffix = self._solve(0, start_state)
        except _Timeout:
            best = None
            if self._root_best is not None:
                z, p = _combine((prefold_zeros, prefold_prod), self._root_best)
                best = Fraction(p, self.scale ** (self.n - z)) if z == 0 else Fraction(0)
            raise SearchLimitError(
                f"time limit of {self.config.time_limit}s exceeded "
                f"({len(self.memo)} memoized states); best product found so far: "
                f"{best if best is not None else 'none'}",
                best_product=best,
            ) from None
        total = _combine((prefold_zeros, prefold_prod), suffix)
        assignment = self._reconstruct(start_state)
        named = {
            self.instance.items[j]: self.instance.agents[a]
            for j, a in sorted(assignment.items())
        }
        alloc = Allocation(named)
        welfare = nsw_product(self.instance, alloc)
        positive = Fraction(total[1], self.scale ** (self.n - total[0]))
        if (
            welfare.zero_agents != total[0]
            or welfare.positive_product != positive
            or welfare.product != (positive if total[0] == 0 else Fraction(0))
        ):
            raise RuntimeError("internal error: reconstructed allocation does not match the search value")
        return alloc, welfare


class _Timeout(Exception):
    pass


def exact_max_nsw(
    instance: Instance, config: SearchConfig | None = None
) -> tuple[Allocation, WelfareValue]:
    """Exactly maximize the welfare product over all allocations.

    Preprocessing forces every item with exactly one positively-interested
    agent to that agent (and items nobody values to the first agent); both
    are exchange-neutral, so the optimum value is unaffected.  Among the
    optima of the remaining search space, the lexicographically smallest
    assignment (by agent index, in instance item order) is returned.
    The result is deterministic and independent of ``worker_count``.
    """
    return _Search(instance, config or SearchConfig()).run()


# ---------------------------------------------------------------------------
# Normal form
# ---------------------------------------------------------------------------

def _prescribed_holder(
    reduced: ReducedInstance, holder: dict[str, str], v: int, e: Edge
) -> tuple[int, str]:
    """Evaluate the four-rule cascade for incidence (v, e) on current holdings."""
    a_v = reduced.vertex_agent[v]
    a_e = reduced.edge_agent[e]
    if any(holder[item] == a_v for item in reduced.vertex_items):
        return 1, a_e
    other_end = e[1] if v == e[0] else e[0]
    if holder[reduced.shared_item[(other_end, e)]] == a_e:
        return 2, a_v
    others = [
        reduced.shared_item[(v, e2)] for e2 in reduced.incident_edges(v) if e2 != e
    ]
    if all(holder[item] == a_v for item in others):
        return 3, a_e
    return 4, a_v


def shared_item_rule(
    reduced: ReducedInstance, alloc: Allocation, incidence: tuple[int, Edge]
) -> tuple[int, str]:
    """Rule index (1..4) and prescribed holder for one shared item.

    Cascade: (1) the vertex agent holds a vertex item -> edge agent;
    (2) the edge agent holds the edge's other shared item -> vertex agent;
    (3) the vertex agent holds both its other shared items -> edge agent;
    (4) otherwise -> vertex agent.
    """
    v, e = incidence
    if (v, e) not in reduced.shared_item:
        raise ReductionError(f"({v}, {e}) is not an incidence of this instance")
    return _prescribed_holder(reduced, dict(alloc.assignment), v, e)


def normalize(reduced: ReducedInstance, alloc: Allocation) -> Allocation:
    """Rewrite ``alloc`` into normal form without ever lowering the product.

    Pass 0 sends single-interest items (the edge items) home.  Pass 1 moves
    vertex items onto vertex agents holding none until each vertex agent has
    at most one, then relabels the identical items canonically.  Pass 2
    sweeps the shared items through the four-rule cascade to a fixpoint.
    Every move is weakly improving for any alpha in [1/3, 1/2].
    """
    problems = validate(reduced.instance, alloc)
    if problems:
        raise AllocationError("allocation does not fit this instance: " + problems[0])
    holder = dict(alloc.assignment)

    for item in reduced.instance.items:
        interested = reduced.instance.interested_agents(item)
        if len(interested) == 1:
            holder[item] = interested[0]

    vertex_agents = [reduced.vertex_agent[v] for v in range(reduced.graph.vertex_count)]
    vertex_agent_set = set(vertex_agents)
    while True:
        counts = {a: 0 for a in vertex_agents}
        for item in reduced.vertex_items:
            if holder[item] in vertex_agent_set:
                counts[holder[item]] += 1
        offender = None
        for item in reduced.vertex_items:
            who = holder[item]
            if who not in vertex_agent_set or counts[who] >= 2:
                offender = item
                break
        if offender is None:
            break
        receiver = next(a for a in vertex_agents if counts[a] == 0)
        holder[offender] = receiver
    holders = [a for a in vertex_agents if any(holder[i] == a for i in reduced.vertex_items)]
    for item, agent in zip(reduced.vertex_items, holders):
        holder[item] = agent

    incidences = reduced.incidences
    for _sweep in range(10_000):
        moved = False
        for v, e in incidences:
            item = reduced.shared_item[(v, e)]
            _, target = _prescribed_holder(reduced, holder, v, e)
            if holder[item] != target:
                holder[item] = target
                moved = True
        if not moved:
            break
    else:
        raise RuntimeError("normalizer failed to reach a fixpoint")
    return Allocation(holder)


def normal_form_violation(reduced: ReducedInstance, alloc: Allocation) -> str | None:
    """First normal-form violation of ``alloc``, or None at a fixpoint."""
    holder = dict(alloc.assignment)
    for e, item in reduced.edge_item.items():
        expected = reduced.edge_agent[e]
        if holder.get(item) != expected:
            return f"edge item {item} must sit with its only interested agent {expected}"
    vertex_agent_set = set(reduced.vertex_agent.values())
    counts: dict[str, int] = {}
    for item in reduced.vertex_items:
        who = holder.get(item)
        if who not in vertex_agent_set:
            return f"vertex item {item} is held by {who}, not a vertex agent"
        counts[who] = counts.get(who, 0) + 1
        if counts[who] > 1:
            return f"vertex agent {who} holds more than one vertex item"
    for v, e in reduced.incidences:
        item = reduced.shared_item[(v, e)]
        rule, target = _prescribed_holder(reduced, holder, v, e)
        if holder.get(item) != target:
            return (
                f"shared item {item} sits with {holder.get(item)}, "
                f"but rule {rule} prescribes {target}"
            )
    return None


# ---------------------------------------------------------------------------
# Soundness structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StructureProfile:
    """Vertex/edge decomposition induced by a normal-form allocation.

    C: vertices whose agent holds a vertex item; I = V \\ C, split into I3
    (agent keeps all three shared items) and I2 (exactly two).  Edges are
    split by how many shared items their agent holds (E0/E1/E2), with E1
    separated into cover-touching (E1C) and independent-side (E1I) parts.
    """

    C: frozenset[int]
    I: frozenset[int]
    I2: frozenset[int]
    I3: frozenset[int]
    E0: tuple[Edge, ...]
    E1C: tuple[Edge, ...]
    E1I: tuple[Edge, ...]
    E2: tuple[Edge, ...]
    t: int

    @property
    def vertex_count(self) -> int:
        return len(self.C) + len(self.I)

    @property
    def edge_count(self) -> int:
        return len(self.E0) + len(self.E1C) + len(self.E1I) + len(self.E2)

    def to_dict(self) -> dict:
        return {
            "C": sorted(self.C),
            "I": sorted(self.I),
            "I2": sorted(self.I2),
            "I3": sorted(self.I3),
            "E0": [list(e) for e in self.E0],
            "E1C": [list(e) for e in self.E1C],
            "E1I": [list(e) for e in self.E1I],
            "E2": [list(e) for e in self.E2],
            "t": self.t,
        }


def analyze_structure(reduced: ReducedInstance, alloc: Allocation) -> StructureProfile:
    """Decompose a normal-form allocation into its structure profile.

    Raises :class:`NormalFormError` (naming the violated rule) unless the
    allocation is a normalize fixpoint.
    """
    problems = validate(reduced.instance, alloc)
    if problems:
        raise AllocationError("allocation does not fit this instance: " + problems[0])
    violation = normal_form_violation(reduced, alloc)
    if violation is not None:
        raise NormalFormError(violation)
    holder = dict(alloc.assignment)
    n_v = reduced.graph.vertex_count
    cover = frozenset(
        v
        for v in range(n_v)
        if any(holder[item] == reduced.vertex_agent[v] for item in reduced.vertex_items)
    )
    independent = frozenset(range(n_v)) - cover
    shared_with_vertex: dict[int, int] = {v: 0 for v in range(n_v)}
    for (v, e), item in reduced.shared_item.items():
        if holder[item] == reduced.vertex_agent[v]:
            shared_with_vertex[v] += 1
    i3 = frozenset(v for v in independent if shared_with_vertex[v] == 3)
    i2 = independent - i3
    for v in i2:
        if shared_with_vertex[v] != 2:
            raise NormalFormError(
                f"vertex agent {reduced.vertex_agent[v]} holds {shared_with_vertex[v]} "
                "shared items; a normal-form allocation allows only 2 or 3 off the cover"
            )
    e_by_count: dict[int, list[Edge]] = {0: [], 1: [], 2: []}
    for e in reduced.graph.edges:
        have = sum(
            1
            for v in e
            if holder[reduced.shared_item[(v, e)]] == reduced.edge_agent[e]
        )
        e_by_count[have].append(e)
    e1c = tuple(e for e in e_by_count[1] if e[0] in cover or e[1] in cover)
    e1i = tuple(e for e in e_by_count[1] if e[0] not in cover and e[1] not in cover)
    profile = StructureProfile(
        C=cover,
        I=independent,
        I2=i2,
        I3=i3,
        E0=tuple(e_by_count[0]),
        E1C=e1c,
        E1I=e1i,
        E2=tuple(e_by_count[2]),
        t=len(e_by_count[2]) - len(i2) - len(e_by_count[0]),
    )
    return profile


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


@dataclass(frozen=True)
class IdentityReport:
    checks: tuple[CheckResult, ...]

    @property
    def all_ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "all_ok": self.all_ok,
            "checks": [{"name": c.name, "ok": c.ok, "detail": c.detail} for c in self.checks],
        }


def verify_identities(reduced: ReducedInstance, profile: StructureProfile) -> IdentityReport:
    """Check the counting identities and structural facts of a profile.

    Failures are report entries, never exceptions.
    """
    n_v = reduced.graph.vertex_count
    m_e = reduced.graph.edge_count
    k = reduced.k
    i2, i3 = len(profile.I2), len(profile.I3)
    e0, e2 = len(profile.E0), len(profile.E2)
    e1 = len(profile.E1C) + len(profile.E1I)
    e1i = len(profile.E1I)
    checks = []
    lhs = 3 * i3 + 2 * i2 + 2 * e2 + e1
    checks.append(CheckResult(
        "shared-item-count",
        lhs == 3 * n_v,
        f"3*|I3| + 2*|I2| + 2*|E2| + |E1| = {lhs}, 3N = {3 * n_v}",
    ))
    checks.append(CheckResult(
        "vertex-count",
        i3 + i2 == n_v - k,
        f"|I3| + |I2| = {i3 + i2}, N - k = {n_v - k}",
    ))
    checks.append(CheckResult(
        "edge-count",
        e2 + e1 + e0 == m_e,
        f"|E2| + |E1| + |E0| = {e2 + e1 + e0}, M = {m_e}",
    ))
    checks.append(CheckResult(
        "e2-surplus",
        e2 == (3 * k - m_e) + i2 + e0,
        f"|E2| = {e2}, (3k - M) + |I2| + |E0| = {(3 * k - m_e) + i2 + e0}",
    ))
    bad_e2 = [e for e in profile.E2 if e[0] not in profile.C or e[1] not in profile.C]
    checks.append(CheckResult(
        "e2-inside-cover",
        not bad_e2,
        "all E2 edges have both endpoints in C" if not bad_e2 else f"violating edges: {bad_e2}",
    ))
    bad_e0 = [e for e in profile.E0 if e[0] not in profile.I2 or e[1] not in profile.I2]
    checks.append(CheckResult(
        "e0-inside-i2",
        not bad_e0,
        "all E0 edges have both endpoints in I2" if not bad_e0 else f"violating edges: {bad_e0}",
    ))
    checks.append(CheckResult(
        "i2-degree-bound",
        3 * i2 >= e1i + 2 * e0,
        f"3*|I2| = {3 * i2}, |E1I| + 2*|E0| = {e1i + 2 * e0}",
    ))
    return IdentityReport(tuple(checks))


def product_formula(profile: StructureProfile, alpha: Fraction) -> WelfareValue:
    """(2/3)^|I2| * (1+alpha)^|E2| * (1-alpha)^|E0| as an exact rational."""
    alpha = Fraction(alpha)
    product = (
        Fraction(2, 3) ** len(profile.I2)
        * (1 + alpha) ** len(profile.E2)
        * (1 - alpha) ** len(profile.E0)
    )
    return WelfareValue.from_positive_product(
        product, profile.vertex_count + profile.edge_count
    )


def soundness_bound(
    graph: Graph, k: int, alpha: Fraction, max_vertices: int = 40
) -> WelfareValue:
    """Exact upper bound on the optimal welfare product of the gadget instance.

    With tau = tau(graph): the bound is (1+alpha)^(3k-M) when tau <= k, and
    (1+alpha)^(3k-M) * (2(1+alpha)/3)^ceil((tau-k)/3) otherwise.  The
    penalty exponent is the integer form of the independent-side counting
    chain: at least tau - k edges stay inside the non-cover side, and each
    non-cover vertex absorbs at most three of them.
    """
    alpha = Fraction(alpha)
    k = int(k)
    tau = len(min_vertex_cover(graph, max_vertices=max_vertices))
    m_e = graph.edge_count
    n = graph.vertex_count + m_e
    if tau <= k:
        if 3 * k < m_e:
            raise ReductionError(
                f"3k = {3 * k} < M = {m_e} is inconsistent with a size-{k} cover"
            )
        product = (1 + alpha) ** (3 * k - m_e)
    else:
        penalty = -((k - tau) // 3)  # ceil((tau - k) / 3)
        product = (1 + alpha) ** (3 * k - m_e) * (Fraction(2, 3) * (1 + alpha)) ** penalty
    return WelfareValue.from_positive_product(product, n)
