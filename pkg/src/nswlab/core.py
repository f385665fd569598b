"""Exact-arithmetic core: allocation instances, welfare values, and file I/O.

All utilities and welfare products are arbitrary-precision rationals
(:class:`fractions.Fraction`).  Floating point appears only in reporting
fields, never inside a comparison.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping

__all__ = [
    "Rational",
    "Instance",
    "Allocation",
    "WelfareValue",
    "InstanceFormatError",
    "AllocationError",
    "parse_rational",
    "format_rational",
    "log_fraction",
    "agent_utility",
    "nsw_product",
    "compare",
    "validate",
    "read_instance",
    "write_instance",
    "read_allocation",
    "write_allocation",
]

Rational = Fraction

# "p" or "p/q" with a plain decimal integer numerator/denominator.
_RATIONAL_RE = re.compile(r"^(-?\d+)(?:/(\d+))?$")


class InstanceFormatError(ValueError):
    """An instance/allocation file or a rational literal violates the schema."""


class AllocationError(ValueError):
    """An allocation is not a valid total partition of an instance's items."""


def parse_rational(text: str) -> Fraction:
    """Parse a rational literal ``"p/q"`` or ``"p"`` into an exact Fraction.

    Any valid p/q is accepted (it need not be in lowest terms); decimal or
    exponent notation is rejected.
    """
    if not isinstance(text, str):
        raise InstanceFormatError(f"expected a rational string, got {type(text).__name__}")
    m = _RATIONAL_RE.match(text.strip())
    if m is None:
        raise InstanceFormatError(f"not a rational literal: {text!r}")
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise InstanceFormatError(f"zero denominator: {text!r}")
    return Fraction(int(m.group(1)), den)


def format_rational(value: Fraction) -> str:
    """Lowest-terms ``"p/q"`` (or ``"p"`` for integers)."""
    return str(Fraction(value))


def log_fraction(value: Fraction) -> float:
    """Natural log of a nonnegative rational, -inf at zero.

    Takes logs of numerator and denominator separately so huge exact
    products never overflow the float conversion.
    """
    if value < 0:
        raise ValueError("log of a negative rational")
    if value == 0:
        return float("-inf")
    return math.log(value.numerator) - math.log(value.denominator)


@dataclass(frozen=True)
class Instance:
    """Agents, items, and a sparse table of nonnegative item utilities.

    Absent utility entries mean exact zero.  Instances are immutable after
    construction and safe to share across concurrent workers.
    """

    agents: tuple[str, ...]
    items: tuple[str, ...]
    utilities: Mapping[tuple[str, str], Fraction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        agents = tuple(self.agents)
        items = tuple(self.items)
        if not agents:
            raise InstanceFormatError("an instance needs at least one agent")
        if len(set(agents)) != len(agents):
            raise InstanceFormatError("duplicate agent identifiers")
        if len(set(items)) != len(items):
            raise InstanceFormatError("duplicate item identifiers")
        known_agents = set(agents)
        known_items = set(items)
        table: dict[tuple[str, str], Fraction] = {}
        for (agent, item), raw in dict(self.utilities).items():
            value = raw if isinstance(raw, Fraction) else Fraction(raw)
            if agent not in known_agents:
                raise InstanceFormatError(f"utility entry for unknown agent {agent!r}")
            if item not in known_items:
                raise InstanceFormatError(f"utility entry for unknown item {item!r}")
            if value < 0:
                raise InstanceFormatError(f"negative utility u({agent!r}, {item!r}) = {value}")
            if value:
                table[(agent, item)] = value
        object.__setattr__(self, "agents", agents)
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "utilities", table)
        agent_pos = {a: i for i, a in enumerate(agents)}
        interest: dict[str, list[str]] = {item: [] for item in items}
        for agent, item in table:
            interest[item].append(agent)
        object.__setattr__(
            self,
            "_interest",
            {item: tuple(sorted(who, key=agent_pos.__getitem__)) for item, who in interest.items()},
        )

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def m(self) -> int:
        return len(self.items)

    def utility(self, agent: str, item: str) -> Fraction:
        return self.utilities.get((agent, item), Fraction(0))

    def interested_agents(self, item: str) -> tuple[str, ...]:
        """Agents with strictly positive utility for ``item``, in agent order."""
        return self._interest[item]  # type: ignore[attr-defined]


@dataclass(frozen=True)
class Allocation:
    """A total assignment of items to agents, stored as item -> agent."""

    assignment: Mapping[str, str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "assignment", dict(self.assignment))

    def agent_of(self, item: str) -> str | None:
        return self.assignment.get(item)

    def bundles(self, instance: Instance) -> dict[str, list[str]]:
        """Items held by each agent, in instance item order."""
        out: dict[str, list[str]] = {agent: [] for agent in instance.agents}
        for item in instance.items:
            agent = self.assignment.get(item)
            if agent in out:
                out[agent].append(item)
        return out


@dataclass(frozen=True)
class WelfareValue:
    """Exact welfare product plus reporting and tie-break fields.

    ``log_geomean`` approximates (1/n)*ln(product) and is -inf for a zero
    product.  ``zero_agents`` and ``positive_product`` (product of the
    nonzero agent utilities) carry the tie-break keys used by
    :func:`compare` when products vanish.
    """

    product: Fraction
    log_geomean: float
    zero_agents: int
    positive_product: Fraction
    agent_count: int

    @classmethod
    def from_positive_product(cls, product: Fraction, agent_count: int) -> "WelfareValue":
        product = Fraction(product)
        if product <= 0:
            raise ValueError("from_positive_product needs a positive product")
        return cls(product, log_fraction(product) / agent_count, 0, product, agent_count)


def validate(instance: Instance, alloc: Allocation) -> list[str]:
    """Schema violations of ``alloc`` against ``instance``; empty means valid.

    A valid allocation assigns every item of the instance to exactly one
    known agent.  (Assigning an item twice is impossible in the mapping
    representation.)  Violations are data, not errors.
    """
    known_items = set(instance.items)
    known_agents = set(instance.agents)
    out: list[str] = []
    for item, agent in alloc.assignment.items():
        if item not in known_items:
            out.append(f"unknown item {item!r} in allocation")
        elif agent not in known_agents:
            out.append(f"item {item!r} assigned to unknown agent {agent!r}")
    for item in instance.items:
        if item not in alloc.assignment:
            out.append(f"item {item!r} is not assigned")
    return out


def _require_valid(instance: Instance, alloc: Allocation) -> None:
    problems = validate(instance, alloc)
    if problems:
        head = "; ".join(problems[:3])
        more = f" (+{len(problems) - 3} more)" if len(problems) > 3 else ""
        raise AllocationError(head + more)


def agent_utility(instance: Instance, alloc: Allocation, agent: str) -> Fraction:
    """Exact additive utility of ``agent`` under ``alloc``."""
    if agent not in set(instance.agents):
        raise AllocationError(f"unknown agent {agent!r}")
    _require_valid(instance, alloc)
    total = Fraction(0)
    for item, holder in alloc.assignment.items():
        if holder == agent:
            total += instance.utilities.get((agent, item), 0)
    return total


def nsw_product(instance: Instance, alloc: Allocation) -> WelfareValue:
    """Exact product of all agent utilities, with reporting fields."""
    _require_valid(instance, alloc)
    totals: dict[str, Fraction] = {agent: Fraction(0) for agent in instance.agents}
    for item, holder in alloc.assignment.items():
        u = instance.utilities.get((holder, item))
        if u:
            totals[holder] += u
    zeros = sum(1 for v in totals.values() if v == 0)
    positive = Fraction(1)
    for v in totals.values():
        if v:
            positive *= v
    n = instance.n
    if zeros:
        return WelfareValue(Fraction(0), float("-inf"), zeros, positive, n)
    return WelfareValue(positive, log_fraction(positive) / n, 0, positive, n)


def compare(a: WelfareValue, b: WelfareValue) -> int:
    """Exact welfare ordering: -1, 0 or 1 (less / equal / greater).

    Primary key: the exact product.  For two zero products: fewer
    zero-utility agents wins, then the larger product of the nonzero
    utilities.
    """
    if a.product != b.product:
        return -1 if a.product < b.product else 1
    if a.product != 0:
        return 0
    if a.zero_agents != b.zero_agents:
        return 1 if a.zero_agents < b.zero_agents else -1
    if a.positive_product != b.positive_product:
        return 1 if a.positive_product > b.positive_product else -1
    return 0


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def write_instance(instance: Instance, path: str | Path) -> None:
    """Write the JSON instance file (rationals in lowest terms, UTF-8)."""
    items_json = []
    for item in instance.items:
        utils: dict[str, str] = {}
        for agent in instance.agents:
            u = instance.utilities.get((agent, item))
            if u:
                utils[agent] = format_rational(u)
        items_json.append({"name": item, "utilities": utils})
    payload = {"agents": list(instance.agents), "items": items_json}
    Path(path).write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def read_instance(path: str | Path) -> Instance:
    """Read a JSON instance file; errors carry line or field context."""
    raw = Path(path).read_text(encoding="utf-8")
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(payload, dict):
        raise InstanceFormatError(f"{path}: top level must be a JSON object")
    agents = payload.get("agents")
    if not isinstance(agents, list) or not all(isinstance(a, str) for a in agents):
        raise InstanceFormatError(f'{path}: "agents" must be an array of strings')
    items_field = payload.get("items")
    if not isinstance(items_field, list):
        raise InstanceFormatError(f'{path}: "items" must be an array')
    agent_set = set(agents)
    items: list[str] = []
    utilities: dict[tuple[str, str], Fraction] = {}
    for i, entry in enumerate(items_field):
        where = f"{path}: items[{i}]"
        if not isinstance(entry, dict) or not isinstance(entry.get("name"), str):
            raise InstanceFormatError(f'{where}: expected an object with a "name" string')
        name = entry["name"]
        utils = entry.get("utilities", {})
        if not isinstance(utils, dict):
            raise InstanceFormatError(f"{where}.utilities: expected an object")
        items.append(name)
        for agent, literal in utils.items():
            ctx = f"{where}.utilities[{agent!r}]"
            if agent not in agent_set:
                raise InstanceFormatError(f"{ctx}: unknown agent")
            if not isinstance(literal, str):
                raise InstanceFormatError(f"{ctx}: utilities must be rational strings")
            try:
                value = parse_rational(literal)
            except InstanceFormatError as exc:
                raise InstanceFormatError(f"{ctx}: {exc}") from None
            if value < 0:
                raise InstanceFormatError(f"{ctx}: negative utility {literal!r}")
            if value:
                utilities[(agent, name)] = value
    try:
        return Instance(tuple(agents), tuple(items), utilities)
    except InstanceFormatError as exc:
        raise InstanceFormatError(f"{path}: {exc}") from None


def write_allocation(alloc: Allocation, path: str | Path) -> None:
    """Write the JSON allocation file (item name -> agent name, sorted keys)."""
    payload = {item: alloc.assignment[item] for item in sorted(alloc.assignment)}
    Path(path).write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def read_allocation(path: str | Path) -> Allocation:
    raw = Path(path).read_text(encoding="utf-8")
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(payload, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in payload.items()
    ):
        raise InstanceFormatError(f"{path}: expected an object mapping item names to agent names")
    return Allocation(payload)
