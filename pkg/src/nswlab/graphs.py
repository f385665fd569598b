"""Cubic (3-regular) graph model, generators, exact minimum vertex cover, I/O.

Vertices are 0..N-1; edges are normalized pairs (u, v) with u < v.  The
vertex-cover search is exact and deterministic: among all minimum covers it
returns the lexicographically smallest member list.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

__all__ = [
    "Edge",
    "Graph",
    "GraphError",
    "CoverBoundError",
    "is_cubic",
    "is_vertex_cover",
    "induced_edges",
    "min_vertex_cover",
    "gen_random_cubic",
    "named_graph",
    "named_graph_choices",
    "read_graph",
    "write_graph",
]

Edge = tuple[int, int]


class GraphError(ValueError):
    """A malformed graph, graph file, or vertex set."""


class CoverBoundError(RuntimeError):
    """The graph exceeds the exact vertex-cover search bound."""


@dataclass(frozen=True)
class Graph:
    """A simple undirected graph with an ordered edge list."""

    vertex_count: int
    edges: tuple[Edge, ...]

    def __post_init__(self) -> None:
        if self.vertex_count < 1:
            raise GraphError("a graph needs at least one vertex")
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        seen: set[Edge] = set()
        for u, v in edges:
            if not (0 <= u < v < self.vertex_count):
                raise GraphError(f"edge ({u}, {v}) is not a normalized pair inside 0..{self.vertex_count - 1}")
            if (u, v) in seen:
                raise GraphError(f"parallel edge ({u}, {v})")
            seen.add((u, v))
        object.__setattr__(self, "edges", edges)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degrees(self) -> list[int]:
        deg = [0] * self.vertex_count
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {v: set() for v in range(self.vertex_count)}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def incident_edges(self, v: int) -> list[Edge]:
        return [e for e in self.edges if v in e]


def _check_vertex_set(g: Graph, members: Iterable[int]) -> set[int]:
    s = {int(v) for v in members}
    for v in s:
        if not 0 <= v < g.vertex_count:
            raise GraphError(f"vertex {v} outside 0..{g.vertex_count - 1}")
    return s


def is_cubic(g: Graph) -> bool:
    """True iff every vertex has degree exactly 3."""
    return all(d == 3 for d in g.degrees())


def is_vertex_cover(g: Graph, members: Iterable[int]) -> bool:
    """True iff every edge has at least one endpoint in ``members``."""
    s = _check_vertex_set(g, members)
    return all(u in s or v in s for u, v in g.edges)


def induced_edges(g: Graph, members: Iterable[int]) -> list[Edge]:
    """Edges with both endpoints in ``members``."""
    s = _check_vertex_set(g, members)
    return [(u, v) for u, v in g.edges if u in s and v in s]


# ---------------------------------------------------------------------------
# Exact minimum vertex cover
# ---------------------------------------------------------------------------

def _remove_vertex(adj: dict[int, set[int]], v: int) -> None:
    for w in adj.pop(v, ()):  # covers all edges at v
        adj[w].discard(v)
        if not adj[w]:
            del adj[w]


def _copy_adj(adj: dict[int, set[int]]) -> dict[int, set[int]]:
    return {u: set(vs) for u, vs in adj.items()}


def _greedy_matching_size(adj: dict[int, set[int]]) -> int:
    used: set[int] = set()
    size = 0
    for u in sorted(adj):
        if u in used:
            continue
        for w in sorted(adj[u]):
            if w not in used:
                used.add(u)
                used.add(w)
                size += 1
                break
    return size


def _cover_decision(adj: dict[int, set[int]], budget: int) -> bool:
    """Does the graph in ``adj`` have a vertex cover of size <= budget?"""
    if budget < 0:
        return False
    adj = _copy_adj(adj)
    while True:
        if not adj:
            return True
        if budget <= 0:
            return False
        leaf = next((u for u in adj if len(adj[u]) == 1), None)
        if leaf is None:
            break
        # a minimum cover may always take the neighbor of a degree-1 vertex
        _remove_vertex(adj, next(iter(adj[leaf])))
        budget -= 1
    edge_count = sum(len(vs) for vs in adj.values()) // 2
    max_deg = max(len(vs) for vs in adj.values())
    if budget * max_deg < edge_count:
        return False
    if _greedy_matching_size(adj) > budget:
        return False
    v = min(u for u in adj if len(adj[u]) == max_deg)
    with_v = _copy_adj(adj)
    _remove_vertex(with_v, v)
    if _cover_decision(with_v, budget - 1):
        return True
    neighbors = sorted(adj[v])
    without_v = _copy_adj(adj)
    for w in neighbors:
        _remove_vertex(without_v, w)
    return _cover_decision(without_v, budget - len(neighbors))


def _edge_adjacency(edges: Iterable[Edge]) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {}
    for u, v in edges:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    return adj


def _cover_number(g: Graph) -> int:
    adj = _edge_adjacency(g.edges)
    k = _greedy_matching_size(adj)
    while not _cover_decision(adj, k):
        k += 1
    return k


def _feasible_extension(g: Graph, chosen: list[int], excluded: set[int], tau: int) -> bool:
    """Is there a cover of size tau containing ``chosen`` and avoiding ``excluded``?"""
    forced = set(chosen)
    for u, v in g.edges:
        if u in excluded and v in excluded:
            return False
        if u in excluded and v not in forced:
            forced.add(v)
        elif v in excluded and u not in forced:
            forced.add(u)
    if len(forced) > tau:
        return False
    rest = [(u, v) for u, v in g.edges if u not in forced and v not in forced]
    if not rest:
        return True
    return _cover_decision(_edge_adjacency(rest), tau - len(forced))


def min_vertex_cover(g: Graph, max_vertices: int = 40) -> list[int]:
    """Exact minimum vertex cover, as the lexicographically smallest sorted list.

    Raises :class:`CoverBoundError` for graphs above ``max_vertices``
    (the exact search is exponential in the worst case).
    """
    if g.vertex_count > max_vertices:
        raise CoverBoundError(
            f"graph has {g.vertex_count} vertices, above the exact-search bound of "
            f"{max_vertices}; raise the max_vertices bound (CLI: --vc-limit) to override"
        )
    tau = _cover_number(g)
    chosen: list[int] = []
    excluded: set[int] = set()
    for v in range(g.vertex_count):
        if len(chosen) == tau:
            break
        if _feasible_extension(g, chosen + [v], excluded, tau):
            chosen.append(v)
        else:
            excluded.add(v)
    if len(chosen) != tau or not is_vertex_cover(g, chosen):
        raise RuntimeError("internal error: vertex-cover reconstruction failed")
    return chosen


# ---------------------------------------------------------------------------
# Generators and named graphs
# ---------------------------------------------------------------------------

def gen_random_cubic(n: int, seed: int) -> Graph:
    """Random simple cubic graph via the pairing model with rejection.

    Deterministic for a fixed (n, seed).  Requires even n >= 4.
    """
    if n < 4 or n % 2:
        raise GraphError("a cubic graph needs an even vertex count of at least 4")
    rng = random.Random(seed)
    while True:
        stubs = [v for v in range(n) for _ in range(3)]
        rng.shuffle(stubs)
        edges: set[Edge] = set()
        ok = True
        for u, v in zip(stubs[0::2], stubs[1::2]):
            if u == v:
                ok = False
                break
            e = (u, v) if u < v else (v, u)
            if e in edges:
                ok = False
                break
            edges.add(e)
        if ok:
            return Graph(n, tuple(sorted(edges)))


_NAMED: dict[str, Graph] = {
    "K4": Graph(4, ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))),
    "K33": Graph(6, ((0, 3), (0, 4), (0, 5), (1, 3), (1, 4), (1, 5), (2, 3), (2, 4), (2, 5))),
    "Prism": Graph(6, ((0, 1), (0, 2), (0, 3), (1, 2), (1, 4), (2, 5), (3, 4), (3, 5), (4, 5))),
    "Petersen": Graph(
        10,
        (
            (0, 1), (0, 4), (0, 5), (1, 2), (1, 6), (2, 3), (2, 7), (3, 4),
            (3, 8), (4, 9), (5, 7), (5, 8), (6, 8), (6, 9), (7, 9),
        ),
    ),
}


def named_graph_choices() -> list[str]:
    return sorted(_NAMED)


def named_graph(name: str) -> Graph:
    """One of the canonical graphs: K4, K33, Prism, Petersen."""
    for key, g in _NAMED.items():
        if key.lower() == name.lower():
            return g
    raise GraphError(f"unknown graph {name!r}; choices: {', '.join(named_graph_choices())}")


# ---------------------------------------------------------------------------
# File format: first line "N M", then M lines "u v" with 0 <= u < v < N
# ---------------------------------------------------------------------------

def write_graph(g: Graph, path: str | Path) -> None:
    lines = [f"{g.vertex_count} {g.edge_count}"]
    lines += [f"{u} {v}" for u, v in g.edges]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_graph(path: str | Path) -> Graph:
    lines = Path(path).read_text(encoding="ascii").splitlines()
    if not lines:
        raise GraphError(f"{path}: empty graph file")
    try:
        n_str, m_str = lines[0].split()
        n, m = int(n_str), int(m_str)
    except ValueError:
        raise GraphError(f'{path}: line 1: expected "N M"') from None
    if len(lines) - 1 < m:
        raise GraphError(f"{path}: expected {m} edge lines, found {len(lines) - 1}")
    edges: list[Edge] = []
    for i in range(1, m + 1):
        try:
            u_str, v_str = lines[i].split()
            u, v = int(u_str), int(v_str)
        except ValueError:
            raise GraphError(f'{path}: line {i + 1}: expected "u v"') from None
        edges.append((u, v))
    try:
        return Graph(n, tuple(edges))
    except GraphError as exc:
        raise GraphError(f"{path}: {exc}") from None
