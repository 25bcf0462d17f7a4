"""Independent reference implementations and instance generators for tests.

Nothing here calls the solver or the constraint rows; the point is to
check them against code that reasons about paths directly.
"""

from __future__ import annotations

import heapq
import itertools
import random

from qosroute.netgraph import Link, NetworkGraph, from_undirected

# five nodes, six bidirectional links (12 directed)
SAMPLE_EDGES = [(1, 2), (1, 4), (1, 5), (2, 3), (3, 4), (4, 5)]


def sample_graph(capacity=1000, cost=1) -> NetworkGraph:
    return from_undirected(5, [(u, v, capacity, cost) for u, v in SAMPLE_EDGES])


def triangle(capacity=1000, cost=1) -> NetworkGraph:
    return from_undirected(3, [(1, 2, capacity, cost), (2, 3, capacity, cost), (1, 3, capacity, cost)])


def diamond(capacity=1000) -> NetworkGraph:
    """Two node-disjoint 2-hop routes from 1 to 4."""
    return from_undirected(4, [(1, 2, capacity, 1), (2, 4, capacity, 1), (1, 3, capacity, 1), (3, 4, capacity, 1)])


def dijkstra(g: NetworkGraph, source: int, sink: int, allowed=None):
    """Textbook heap Dijkstra; ``None`` when the sink is unreachable."""
    adj = {u: [] for u in range(1, g.n_nodes + 1)}
    for i, lk in enumerate(g.links):
        if allowed is None or allowed(lk):
            adj[lk.start].append((lk.end, lk.cost))
    dist = {source: 0}
    heap = [(0, source)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == sink:
            return d
        for v, c in adj[u]:
            nd = d + c
            if nd < dist.get(v, float("inf")):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return None


def simple_paths(g: NetworkGraph, source: int, sink: int):
    """Every simple source-sink path as a tuple of 1-based link ids."""
    out_links = {u: [] for u in range(1, g.n_nodes + 1)}
    for i, lk in enumerate(g.links, start=1):
        out_links[lk.start].append((i, lk.end))
    found = []

    def dfs(u, seen, path):
        if u == sink:
            found.append(tuple(path))
            return
        for i, v in out_links[u]:
            if v not in seen:
                seen.add(v)
                path.append(i)
                dfs(v, seen, path)
                path.pop()
                seen.remove(v)

    dfs(source, {source}, [])
    return found


def directed_cycles(g: NetworkGraph):
    """Every simple directed cycle as a frozenset of link ids."""
    cycles = set()
    out_links = {u: [] for u in range(1, g.n_nodes + 1)}
    for i, lk in enumerate(g.links, start=1):
        out_links[lk.start].append((i, lk.end))
    for start in range(1, g.n_nodes + 1):
        # only cycles whose smallest node is ``start``
        def dfs(u, seen, path):
            for i, v in out_links[u]:
                if v == start:
                    cycles.add(frozenset(path + [i]))
                elif v > start and v not in seen:
                    seen.add(v)
                    dfs(v, seen, path + [i])
                    seen.remove(v)

        dfs(start, {start}, [])
    return cycles


def conserving_columns(g: NetworkGraph, source: int, sink: int):
    """All link sets carrying one unit from source to sink.

    Built as a simple path plus any collection of pairwise link-disjoint
    directed cycles that also avoid the path's links.
    """
    cycles = list(directed_cycles(g))
    circulations = {frozenset()}
    for cyc in cycles:
        circulations |= {c | cyc for c in circulations if not (c & cyc)}
    return {
        frozenset(p) | c
        for p in simple_paths(g, source, sink)
        for c in circulations
        if not (c & frozenset(p))
    }


def brute_force_mrc(g: NetworkGraph, flows):
    """Max over tuples of simple paths of the min link residual (sentinel on idle links)."""
    big = max((lk.capacity for lk in g.links), default=0) + 1
    options = [simple_paths(g, s, d) for s, d, _ in flows]
    best = None
    for combo in itertools.product(*options):
        loads = {}
        for (s, d, demand), path in zip(flows, combo):
            for i in path:
                loads[i] = loads.get(i, 0) + demand
        res = [g.links[i - 1].capacity - loads[i] if i in loads else big for i in range(1, g.n_links + 1)]
        if min(res) < 0:
            continue
        value = min(res)
        if best is None or value > best:
            best = value
    return best


def random_graph(rng: random.Random, max_nodes=5, max_links=10, cap=(1, 20), cost=(1, 9)) -> NetworkGraph:
    n = rng.randint(2, max_nodes)
    pairs = [(u, v) for u in range(1, n + 1) for v in range(1, n + 1) if u != v]
    arcs = sorted(rng.sample(pairs, min(len(pairs), rng.randint(1, max_links))))
    return NetworkGraph(n, tuple(Link(u, v, rng.randint(*cap), rng.randint(*cost)) for u, v in arcs))


def random_connected_graph(rng: random.Random, n: int, extra: int, cost=(1, 9), cap=1000) -> NetworkGraph:
    """Random spanning tree plus extra arcs; both directions of tree edges, asymmetric costs."""
    order = list(range(1, n + 1))
    rng.shuffle(order)
    arcs = {}
    for k in range(1, n):
        u, v = order[k], order[rng.randrange(k)]
        arcs[(u, v)] = rng.randint(*cost)
        arcs[(v, u)] = rng.randint(*cost)
    extra = min(extra, n * (n - 1) - len(arcs))
    while extra > 0:
        u, v = rng.sample(range(1, n + 1), 2)
        if (u, v) not in arcs:
            arcs[(u, v)] = rng.randint(*cost)
            extra -= 1
    return NetworkGraph(n, tuple(Link(u, v, cap, c) for (u, v), c in sorted(arcs.items())))
