"""Compile a cubic graph into a gadget allocation instance.

For a cubic graph on N vertices and M = 1.5N edges, the instance has one
agent per vertex and per edge (n = N + M), plus three item classes:

* k identical *vertex items*, worth 1 to every vertex agent;
* one *edge item* per edge, worth 1 - alpha to its edge agent only;
* one *shared item* per vertex-edge incidence, worth 1/3 to the vertex
  agent and alpha to the edge agent.

So m = k + M + 3N.  A vertex cover of size k turns into an allocation whose
welfare product is exactly (1 + alpha)^(3k - M); the module also evaluates
the inapproximability-gap constants attached to that construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable

from .core import (
    Allocation,
    Instance,
    InstanceFormatError,
    WelfareValue,
    format_rational,
    parse_rational,
    read_instance,
)
from .graphs import Edge, Graph, is_cubic, is_vertex_cover

__all__ = [
    "ALPHA_DEFAULT",
    "C_MIN_DEFAULT",
    "C_MAX_DEFAULT",
    "ReductionError",
    "ReductionParams",
    "ReducedInstance",
    "HardnessConstants",
    "InequalityCheck",
    "build_instance",
    "completeness_allocation",
    "completeness_value",
    "hardness_constants",
    "improving_move_inequalities",
    "write_tags",
    "load_reduced",
]

ALPHA_DEFAULT = Fraction(2, 5)
C_MIN_DEFAULT = 0.5103
C_MAX_DEFAULT = 0.5155

_THIRD = Fraction(1, 3)
_HALF = Fraction(1, 2)


class ReductionError(ValueError):
    """Invalid reduction parameters or construction inputs."""


@dataclass(frozen=True)
class ReductionParams:
    """Utility constant alpha and the vertex-item budget k.

    alpha must lie strictly between 1/3 and 1/2; with ``allow_boundary``
    the closed endpoints are accepted (the improving-move ratios degrade
    to equalities there, so normal-form moves stop being strict).
    """

    alpha: Fraction
    vertex_item_count: int
    allow_boundary: bool = False

    def __post_init__(self) -> None:
        alpha = Fraction(self.alpha)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "vertex_item_count", int(self.vertex_item_count))
        if self.vertex_item_count < 0:
            raise ReductionError("vertex_item_count must be nonnegative")
        if self.allow_boundary:
            if not _THIRD <= alpha <= _HALF:
                raise ReductionError(f"alpha = {alpha} outside [1/3, 1/2]")
        elif not _THIRD < alpha < _HALF:
            raise ReductionError(
                f"alpha = {alpha} is not strictly between 1/3 and 1/2 "
                "(use allow_boundary to permit the endpoints)"
            )


def vertex_agent_name(v: int) -> str:
    return f"v:{v}"


def edge_agent_name(e: Edge) -> str:
    return f"e:{e[0]}-{e[1]}"


def vertex_item_name(j: int) -> str:
    return f"vi:{j}"


def edge_item_name(e: Edge) -> str:
    return f"ei:{e[0]}-{e[1]}"


def shared_item_name(v: int, e: Edge) -> str:
    return f"si:{v}@{e[0]}-{e[1]}"


@dataclass(frozen=True)
class ReducedInstance:
    """A gadget instance plus the tags tying agents/items back to the graph."""

    instance: Instance
    graph: Graph
    params: ReductionParams
    vertex_agent: dict[int, str]
    edge_agent: dict[Edge, str]
    vertex_items: tuple[str, ...]
    edge_item: dict[Edge, str]
    shared_item: dict[tuple[int, Edge], str]

    @property
    def alpha(self) -> Fraction:
        return self.params.alpha

    @property
    def k(self) -> int:
        return self.params.vertex_item_count

    @property
    def incidences(self) -> tuple[tuple[int, Edge], ...]:
        """All (vertex, edge) incidences in lexicographic order."""
        return tuple(sorted(self.shared_item))

    def incident_edges(self, v: int) -> list[Edge]:
        return [e for e in self.graph.edges if v in e]


def build_instance(graph: Graph, params: ReductionParams) -> ReducedInstance:
    """Compile ``graph`` into its gadget instance.

    Agent order: vertex agents by vertex index, then edge agents by edge
    index.  Item order: vertex items, edge items, then shared items by
    (vertex, edge) lexicographic.
    """
    if not is_cubic(graph):
        raise ReductionError("the gadget construction needs a 3-regular graph")
    n_v = graph.vertex_count
    k = params.vertex_item_count
    if k > n_v:
        raise ReductionError(f"vertex_item_count {k} exceeds the vertex count {n_v}")
    alpha = params.alpha
    edges = list(graph.edges)
    vertex_agents = [vertex_agent_name(v) for v in range(n_v)]
    edge_agents = [edge_agent_name(e) for e in edges]
    vertex_items = [vertex_item_name(j) for j in range(k)]
    edge_items = [edge_item_name(e) for e in edges]
    incidences = sorted((v, e) for e in edges for v in e)
    shared_items = [shared_item_name(v, e) for v, e in incidences]
    utilities: dict[tuple[str, str], Fraction] = {}
    for name in vertex_items:
        for agent in vertex_agents:
            utilities[(agent, name)] = Fraction(1)
    for e, name in zip(edges, edge_items):
        utilities[(edge_agent_name(e), name)] = 1 - alpha
    for (v, e), name in zip(incidences, shared_items):
        utilities[(vertex_agent_name(v), name)] = _THIRD
        utilities[(edge_agent_name(e), name)] = alpha
    instance = Instance(
        tuple(vertex_agents + edge_agents),
        tuple(vertex_items + edge_items + shared_items),
        utilities,
    )
    return ReducedInstance(
        instance=instance,
        graph=graph,
        params=params,
        vertex_agent={v: vertex_agents[v] for v in range(n_v)},
        edge_agent={e: edge_agent_name(e) for e in edges},
        vertex_items=tuple(vertex_items),
        edge_item={e: edge_item_name(e) for e in edges},
        shared_item={(v, e): shared_item_name(v, e) for v, e in incidences},
    )


def completeness_allocation(reduced: ReducedInstance, cover: Iterable[int]) -> Allocation:
    """The allocation induced by a vertex cover of size k.

    Cover vertices take one vertex item each (in index order); other vertex
    agents keep their three shared items; each edge agent takes its edge
    item plus every shared item whose vertex lies in the cover.
    """
    cover_set = sorted({int(v) for v in cover})
    if len(cover_set) != reduced.k:
        raise ReductionError(
            f"cover has {len(cover_set)} vertices but the instance carries {reduced.k} vertex items"
        )
    if not is_vertex_cover(reduced.graph, cover_set):
        raise ReductionError("the given vertex set does not cover every edge")
    in_cover = set(cover_set)
    assignment: dict[str, str] = {}
    for item, v in zip(reduced.vertex_items, cover_set):
        assignment[item] = reduced.vertex_agent[v]
    for e in reduced.graph.edges:
        assignment[reduced.edge_item[e]] = reduced.edge_agent[e]
    for (v, e), item in reduced.shared_item.items():
        assignment[item] = reduced.edge_agent[e] if v in in_cover else reduced.vertex_agent[v]
    return Allocation(assignment)


def completeness_value(graph: Graph, k: int, alpha: Fraction) -> WelfareValue:
    """Closed-form welfare product (1 + alpha)^(3k - M) of a size-k cover allocation.

    Whether a size-k cover actually exists is the caller's responsibility;
    3k < M is rejected because then even the shared-item counting fails.
    """
    m_edges = graph.edge_count
    exponent = 3 * int(k) - m_edges
    if exponent < 0:
        raise ReductionError(
            f"3k = {3 * int(k)} < M = {m_edges}: no size-{k} cover can exist on this graph"
        )
    product = (1 + Fraction(alpha)) ** exponent
    return WelfareValue.from_positive_product(product, graph.vertex_count + m_edges)


@dataclass(frozen=True)
class HardnessConstants:
    """The gap constants derived from a vertex-cover promise (c_min, c_max)."""

    alpha: Fraction
    c_min: float
    c_max: float
    beta: float
    gamma: float
    mu: float


def hardness_constants(
    alpha: Fraction,
    c_min: float = C_MIN_DEFAULT,
    c_max: float = C_MAX_DEFAULT,
) -> HardnessConstants:
    """beta = 3(c_min - 1/2), gamma = (c_max - c_min)/3, mu = (2(1+alpha)/3)^(-gamma/2.5).

    mu > 1 whenever alpha < 1/2: the promise separates welfare values by a
    constant factor.
    """
    alpha = Fraction(alpha)
    if c_min <= 0.5:
        raise ReductionError(f"c_min = {c_min} must exceed 0.5 (beta would be nonpositive)")
    if c_max <= c_min:
        raise ReductionError(f"c_max = {c_max} must exceed c_min = {c_min}")
    beta = 3.0 * (c_min - 0.5)
    gamma = (c_max - c_min) / 3.0
    base = 2.0 * float(1 + alpha) / 3.0
    mu = base ** (-gamma / 2.5)
    return HardnessConstants(alpha=alpha, c_min=c_min, c_max=c_max, beta=beta, gamma=gamma, mu=mu)


@dataclass(frozen=True)
class InequalityCheck:
    """One strict improving-move ratio, evaluated exactly."""

    rule: int
    expression: str
    ratio: Fraction
    holds: bool


def improving_move_inequalities(alpha: Fraction) -> tuple[InequalityCheck, ...]:
    """The four improving-move ratios behind the shared-item rules.

    Each must exceed 1 strictly for the corresponding move to improve the
    welfare product; all four hold exactly when 1/3 < alpha < 1/2.
    """
    alpha = Fraction(alpha)
    if alpha <= 0:
        raise ReductionError("alpha must be positive")
    if alpha >= 1:
        raise ReductionError("alpha must be below 1")
    ratios = (
        (1, "3/4 * (1 + alpha)", Fraction(3, 4) * (1 + alpha)),
        (2, "(3/2) / (1 + alpha)", Fraction(3, 2) / (1 + alpha)),
        (3, "(2/3) / (1 - alpha)", Fraction(2, 3) / (1 - alpha)),
        (4, "2 * (1 - alpha)", 2 * (1 - alpha)),
    )
    return tuple(
        InequalityCheck(rule=rule, expression=expr, ratio=ratio, holds=ratio > 1)
        for rule, expr, ratio in ratios
    )


# ---------------------------------------------------------------------------
# Tags sidecar: graph + params + a role record per agent/item name
# ---------------------------------------------------------------------------

def _role_table(reduced: ReducedInstance) -> dict[str, dict]:
    roles: dict[str, dict] = {}
    for v, name in reduced.vertex_agent.items():
        roles[name] = {"kind": "vertex-agent", "vertex": v}
    for e, name in reduced.edge_agent.items():
        roles[name] = {"kind": "edge-agent", "edge": list(e)}
    for j, name in enumerate(reduced.vertex_items):
        roles[name] = {"kind": "vertex-item", "index": j}
    for e, name in reduced.edge_item.items():
        roles[name] = {"kind": "edge-item", "edge": list(e)}
    for (v, e), name in reduced.shared_item.items():
        roles[name] = {"kind": "shared-item", "vertex": v, "edge": list(e)}
    return roles


def write_tags(reduced: ReducedInstance, path: str | Path) -> None:
    """Write the sidecar JSON tying names back to graph roles."""
    payload = {
        "format": "nswlab-tags-v1",
        "graph": {
            "vertex_count": reduced.graph.vertex_count,
            "edges": [list(e) for e in reduced.graph.edges],
        },
        "params": {
            "alpha": format_rational(reduced.alpha),
            "vertex_item_count": reduced.k,
            "allow_boundary": reduced.params.allow_boundary,
        },
        "roles": _role_table(reduced),
    }
    Path(path).write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def load_reduced(instance_path: str | Path, tags_path: str | Path) -> ReducedInstance:
    """Rebuild a ReducedInstance from instance + tags files.

    The tags define graph and params; the instance is rebuilt from them and
    must match the instance file structurally.
    """
    raw = Path(tags_path).read_text(encoding="utf-8")
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{tags_path}: line {exc.lineno}: {exc.msg}") from None
    try:
        g = Graph(
            payload["graph"]["vertex_count"],
            tuple(tuple(e) for e in payload["graph"]["edges"]),
        )
        params = ReductionParams(
            alpha=parse_rational(payload["params"]["alpha"]),
            vertex_item_count=payload["params"]["vertex_item_count"],
            allow_boundary=bool(payload["params"].get("allow_boundary", False)),
        )
    except (KeyError, TypeError) as exc:
        raise InstanceFormatError(f"{tags_path}: malformed tags file ({exc})") from None
    reduced = build_instance(g, params)
    on_disk = read_instance(instance_path)
    if on_disk != reduced.instance:
        raise InstanceFormatError(
            f"{instance_path} does not match the instance implied by {tags_path}"
        )
    return reduced
