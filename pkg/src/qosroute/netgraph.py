"""Directed flow networks in link-array form.

Nodes and links are numbered from 1.  The order of ``NetworkGraph.links``
is normative: row ``i`` of the links array is row ``i`` of every
link-flow-membership matrix built over the graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra


@dataclass(frozen=True)
class Link:
    start: int
    end: int
    capacity: int
    cost: int


@dataclass(frozen=True)
class NetworkGraph:
    n_nodes: int
    links: tuple[Link, ...]

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))

    @property
    def n_links(self) -> int:
        return len(self.links)

    @property
    def capacities(self) -> np.ndarray:
        return np.array([lk.capacity for lk in self.links], dtype=np.int64)

    @property
    def costs(self) -> np.ndarray:
        return np.array([lk.cost for lk in self.links], dtype=np.int64)

    def out_links(self, u: int) -> list[int]:
        """1-based ids of links leaving ``u``, in row order."""
        return self._incidence()[0][u]

    def in_links(self, u: int) -> list[int]:
        return self._incidence()[1][u]

    def _incidence(self):
        cached = self.__dict__.get("_inc")
        if cached is None:
            out = [[] for _ in range(self.n_nodes + 1)]
            inc = [[] for _ in range(self.n_nodes + 1)]
            for i, lk in enumerate(self.links, start=1):
                if 1 <= lk.start <= self.n_nodes:
                    out[lk.start].append(i)
                if 1 <= lk.end <= self.n_nodes:
                    inc[lk.end].append(i)
            cached = (out, inc)
            object.__setattr__(self, "_inc", cached)
        return cached

    def link_id(self, u: int, v: int) -> int | None:
        for i in self.out_links(u):
            if self.links[i - 1].end == v:
                return i
        return None


class GraphError(ValueError):
    pass


def validate_graph(g: NetworkGraph) -> list[str]:
    """Return every invariant violation of ``g``; an empty list means valid."""
    problems = []
    if g.n_nodes < 0:
        problems.append(f"negative node count {g.n_nodes}")
    seen = {}
    for i, lk in enumerate(g.links, start=1):
        for name in ("start", "end"):
            node = getattr(lk, name)
            if not 1 <= node <= g.n_nodes:
                problems.append(f"link {i}: {name} node {node} outside 1..{g.n_nodes}")
        if lk.start == lk.end:
            problems.append(f"link {i}: self-loop at node {lk.start}")
        if lk.capacity < 0:
            problems.append(f"link {i}: negative capacity {lk.capacity}")
        if lk.cost < 0:
            problems.append(f"link {i}: negative cost {lk.cost}")
        key = (lk.start, lk.end)
        if key in seen:
            problems.append(f"link {i}: duplicate arc {key} (first at link {seen[key]})")
        else:
            seen[key] = i
    return problems


def from_undirected(
    n_nodes: int, edges: Iterable[tuple[int, int, int, int]]
) -> NetworkGraph:
    """Replace each undirected edge by two opposite arcs.

    Links come out sorted by start node, then end node, so the result does
    not depend on the order of ``edges``.
    """
    arcs = {}
    seen = set()
    for u, v, capacity, cost in edges:
        key = frozenset((u, v))
        if key in seen:
            raise GraphError(f"duplicate undirected edge {u}-{v}")
        seen.add(key)
        arcs[(u, v)] = Link(u, v, capacity, cost)
        arcs[(v, u)] = Link(v, u, capacity, cost)
    return NetworkGraph(n_nodes, tuple(arcs[k] for k in sorted(arcs)))


def divergence(g: NetworkGraph, flow: Sequence[int], u: int) -> int:
    """Flow leaving ``u`` minus flow entering it."""
    out = sum(flow[i - 1] for i in g.out_links(u))
    into = sum(flow[i - 1] for i in g.in_links(u))
    return out - into


def residual(g: NetworkGraph, flow: Sequence[int]) -> list[int]:
    # may go negative; capacity constraints are enforced elsewhere
    return [lk.capacity - f for lk, f in zip(g.links, flow)]


def adjacency_matrix(g: NetworkGraph) -> np.ndarray:
    m = np.zeros((g.n_nodes, g.n_nodes), dtype=np.int8)
    for lk in g.links:
        m[lk.start - 1, lk.end - 1] = 1
    return m


def distances_to(
    g: NetworkGraph,
    target: int,
    weights: Sequence[int] | None = None,
    allowed: Sequence[bool] | None = None,
) -> np.ndarray:
    """Shortest distance from every node to ``target`` over allowed links.

    Index 0 is unused so the result is addressed by node id; unreachable
    nodes get ``inf``.  Unit weights when ``weights`` is None.
    """
    n = g.n_nodes
    mask = np.ones(g.n_links, bool) if allowed is None else np.asarray(allowed, bool)
    w = np.ones(g.n_links) if weights is None else np.asarray(weights, dtype=float)
    starts = np.array([lk.start - 1 for lk in g.links], dtype=np.int64)
    ends = np.array([lk.end - 1 for lk in g.links], dtype=np.int64)
    # reversed arcs: distance from target in the transpose is distance to it here
    rev = csr_matrix((w[mask], (ends[mask], starts[mask])), shape=(n, n))
    d = dijkstra(rev, directed=True, indices=target - 1)
    return np.concatenate(([np.inf], d))
