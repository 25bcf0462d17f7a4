"""Evaluation topologies: square grids and k-port fat-trees."""

from __future__ import annotations

from dataclasses import dataclass

from .netgraph import GraphError, NetworkGraph, from_undirected

DEFAULT_CAPACITY = 1000
DEFAULT_COST = 1


@dataclass(frozen=True)
class GridSpec:
    order: int
    capacity: int = DEFAULT_CAPACITY
    cost: int = DEFAULT_COST

    def __post_init__(self):
        if self.order < 1:
            raise GraphError(f"grid order must be >= 1, got {self.order}")


@dataclass(frozen=True)
class FatTreeSpec:
    k: int
    capacity: int = DEFAULT_CAPACITY
    cost: int = DEFAULT_COST

    def __post_init__(self):
        if self.k < 2 or self.k % 2:
            raise GraphError(f"fat-tree k must be even and >= 2, got {self.k}")


def grid(spec: GridSpec) -> NetworkGraph:
    """n-by-n lattice, nodes numbered row-major from 1."""
    n = spec.order
    edges = []
    for r in range(n):
        for c in range(n):
            u = r * n + c + 1
            if c + 1 < n:
                edges.append((u, u + 1, spec.capacity, spec.cost))
            if r + 1 < n:
                edges.append((u, u + n, spec.capacity, spec.cost))
    return from_undirected(n * n, edges)


def grid_diagonal_endpoints(spec: GridSpec) -> tuple[int, int]:
    if spec.order < 2:
        raise GraphError("grid of order 1 has a single node; source would equal sink")
    return 1, spec.order * spec.order


@dataclass(frozen=True)
class FatTree:
    graph: NetworkGraph
    roles: tuple[str, ...]  # roles[u - 1] is one of core/aggregation/edge/host

    def nodes_with_role(self, role: str) -> list[int]:
        return [u for u, r in enumerate(self.roles, start=1) if r == role]


def fat_tree(spec: FatTreeSpec) -> FatTree:
    """Build the k-port fat-tree.

    Numbering: core switches first, then each pod's aggregation switches
    followed by its edge switches, then all hosts (k/2 per edge switch,
    in edge-switch order).
    """
    k = spec.k
    half = k // 2
    roles = ["core"] * (half * half)
    agg = []
    edge = []
    for _ in range(k):
        first = len(roles) + 1
        agg.append(list(range(first, first + half)))
        roles += ["aggregation"] * half
        first = len(roles) + 1
        edge.append(list(range(first, first + half)))
        roles += ["edge"] * half

    cap, cost = spec.capacity, spec.cost
    edges = []
    for pod in range(k):
        for j, a in enumerate(agg[pod]):
            # aggregation switch j uplinks to core block j
            for c in range(j * half, (j + 1) * half):
                edges.append((c + 1, a, cap, cost))
            for e in edge[pod]:
                edges.append((a, e, cap, cost))
    for pod in range(k):
        for e in edge[pod]:
            for _ in range(half):
                roles.append("host")
                edges.append((e, len(roles), cap, cost))

    return FatTree(from_undirected(len(roles), edges), tuple(roles))


def fat_tree_endpoints(spec: FatTreeSpec) -> tuple[int, int]:
    """First and last host under the canonical numbering."""
    half = spec.k // 2
    switches = half * half + spec.k * spec.k
    hosts = spec.k * half * half
    return switches + 1, switches + hosts
