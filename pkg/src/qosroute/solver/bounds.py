"""Admissible objective bounds on partial LFM assignments.

Every derived family is monotone in the LFM entries (Residuals shrink as
flows are added, everything else grows), so evaluating the objective with
all free entries at 0 or all at 1 always gives a valid optimistic value.
Two objectives get tighter, problem-aware bounds on top of that:

* least total cost: each unfinished flow still needs a path from the end
  of its committed walk to its sink, priced by static shortest distances;
* max-min residual: flows that have not left their source (or entered
  their sink) must share that node's links, which caps the best reachable
  minimum residual there.
"""

from __future__ import annotations

import math

import numpy as np

from ..netgraph import distances_to
from ..predicates import MONOTONE, ConstraintModel, Min, Sum, Var, evaluate, expr_value

INF = math.inf


class PartialView:
    """Read-only helpers over the engine's domains for one model."""

    def __init__(self, model: ConstraintModel, engine):
        self.model = model
        g = model.graph
        self.L, self.F = model.n_links, model.n_flows
        self.n_lfm = model.n_lfm
        self.lo = np.frombuffer(engine.lo, dtype=np.uint8)
        self.hi = np.frombuffer(engine.hi, dtype=np.uint8)
        self.lo_b = engine.lo  # bytearrays index faster than numpy scalars
        self.hi_b = engine.hi
        self.start = [lk.start for lk in g.links]
        self.end = [lk.end for lk in g.links]
        self.cap = [lk.capacity for lk in g.links]
        self.cost = [lk.cost for lk in g.links]
        self.caps = g.capacities
        self.demand_vec = np.array(model.flows.demands, dtype=np.int64)
        # 0-based out-links per node id
        self.out = [[i - 1 for i in g.out_links(u)] for u in range(g.n_nodes + 1)]
        self.inn = [[i - 1 for i in g.in_links(u)] for u in range(g.n_nodes + 1)]
        self.flows = model.flows.flows

    def x(self, a: int, j: int) -> int:
        return a * self.F + j

    def lo_matrix(self) -> np.ndarray:
        return self.lo[: self.n_lfm].reshape(self.L, self.F)

    def hi_matrix(self) -> np.ndarray:
        return self.hi[: self.n_lfm].reshape(self.L, self.F)

    def committed_loads(self) -> np.ndarray:
        if not self.F:
            return np.zeros(self.L, np.int64)
        return self.lo_matrix().astype(np.int64) @ self.demand_vec

    def walk(self, j: int):
        """Follow committed links of flow ``j`` from its source.

        Returns ``(end node, walk links, nodes visited)``; links are taken
        in row order and never reused.
        """
        lo, F = self.lo_b, self.F
        v = self.flows[j][0]
        used = set()
        nodes = {v}
        while True:
            for a in self.out[v]:
                if lo[a * F + j] and a not in used:
                    used.add(a)
                    v = self.end[a]
                    nodes.add(v)
                    break
            else:
                return v, used, nodes

    def open_out_links(self, v: int, j: int) -> list[int]:
        lo, hi, F = self.lo_b, self.hi_b, self.F
        return [a for a in self.out[v] if hi[a * F + j] and not lo[a * F + j]]


def static_distances(view: PartialView, weights) -> list[np.ndarray]:
    """Per-flow distance-to-sink over links still open at the root."""
    g = view.model.graph
    hi = view.hi_matrix()
    return [
        distances_to(g, view.flows[j][1], weights, hi[:, j].astype(bool))
        for j in range(view.F)
    ]


class Bound:
    """Optimistic objective value; ``None`` means no useful bound."""

    def __init__(self, view: PartialView):
        self.view = view
        model = view.model
        self.objective = model.objective
        expr = self.objective.expr
        self.name = expr.name
        # evaluate free entries at the value that favours the objective
        favour_zero = (self.objective.sense == "minimize") == (MONOTONE[self.name] > 0)
        self.favour_zero = favour_zero

    def value(self):
        v = self.view
        m = v.lo_matrix() if self.favour_zero else v.hi_matrix()
        values = evaluate(self.view.model, m, names=(self.name,))[self.name]
        if not self.favour_zero and self.name in ("Delay", "Congestion"):
            if any(x is None or x < 0 for x in values):
                return None
        return expr_value(self.objective.expr, values)


class CostBound(Bound):
    """Least-cost objectives: committed cost plus cheapest completion."""

    def __init__(self, view: PartialView):
        super().__init__(view)
        expr = self.objective.expr
        self.flows = [expr.index - 1] if isinstance(expr, Var) else list(range(view.F))
        self.dist = static_distances(view, view.cost)

    def completion(self, j: int):
        """Committed cost of flow ``j`` and a lower bound on what it still needs."""
        v = self.view
        lo, F, cost = v.lo_b, v.F, v.cost
        committed = sum(cost[a] for a in range(v.L) if lo[a * F + j])
        end, walk, _ = v.walk(j)
        if end == v.flows[j][1]:
            return committed, 0
        off_walk = committed - sum(cost[a] for a in walk)
        dist = self.dist[j]
        best = min(
            (cost[a] + dist[v.end[a]] for a in v.open_out_links(end, j)),
            default=INF,
        )
        if best == INF:
            return committed, INF
        return committed, max(0, int(best) - off_walk)

    def value(self):
        total = 0
        for j in self.flows:
            committed, extra = self.completion(j)
            if extra == INF:
                return INF
            total += committed + extra
        return total


class MinResidualBound(Bound):
    """maximize min(Residuals) with source/sink sharing caps."""

    def __init__(self, view: PartialView):
        super().__init__(view)
        self.big = view.model.max_sentinel
        groups = {}
        for j, (s, d, _) in enumerate(view.flows):
            groups.setdefault(("out", s), []).append(j)
            groups.setdefault(("in", d), []).append(j)
        self.groups = sorted(groups.items())

    def value(self):
        v = self.view
        loads = v.committed_loads()
        res = np.where(loads > 0, v.caps - loads, self.big)
        best = int(res.min()) if len(res) else self.big
        lo, hi, F = v.lo_b, v.hi_b, v.F
        for (side, node), js in self.groups:
            links = v.out[node] if side == "out" else v.inn[node]
            pending = [j for j in js if not any(lo[a * F + j] for a in links)]
            if not pending:
                continue
            open_links = [a for a in links if any(hi[a * F + j] for j in pending)]
            demands = [v.flows[j][2] for j in pending]
            cap = sharing_cap([v.cap[a] - int(loads[a]) for a in open_links], demands)
            best = min(best, cap)
        return best


def sharing_cap(residuals: list[int], demands: list[int]) -> float:
    """Largest integer t any placement can keep as the minimum residual.

    Each pending demand must land on at least one of the links, so with
    ``t`` as the target every link can absorb at most ``residual - t``.
    Both the divisible relaxation and the per-link count of whole flows
    (each at least the smallest demand) must still fit.
    """
    if not residuals:
        return -INF
    total, m, fmin = sum(demands), len(demands), min(demands)

    def fits(t):
        room = sum(max(0, r - t) for r in residuals)
        slots = sum(max(0, (r - t) // fmin) for r in residuals)
        return room >= total and slots >= m

    lo, hi = min(residuals) - total, max(residuals)
    if not fits(lo):
        return -INF
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if fits(mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def make_bound(view: PartialView):
    obj = view.model.objective
    if obj is None:
        return None
    expr = obj.expr
    if expr.name == "Cost" and obj.sense == "minimize" and isinstance(expr, (Var, Sum)):
        return CostBound(view)
    if expr.name == "Residuals" and obj.sense == "maximize" and isinstance(expr, Min):
        return MinResidualBound(view)
    return Bound(view)


def better(a, b, sense: str) -> bool:
    """True if ``a`` is strictly better than ``b``; ``None`` bounds always are."""
    if a is None or b is None:
        return True
    return a < b if sense == "minimize" else a > b

