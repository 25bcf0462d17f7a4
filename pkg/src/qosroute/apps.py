"""Routing applications built from predicates, and LFM-to-path translation."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import predicates as P
from .netgraph import NetworkGraph
from .predicates import ConstraintModel, FlowSpec, LinkFlowMembership, ModelError
from .solver import SolveOutcome, SolverConfig, solve


class CycleDiscardedWarning(UserWarning):
    """An LFM column carried a flow-conserving cycle off the routed path."""


class MalformedColumnError(ValueError):
    pass


@dataclass(frozen=True)
class RoutePath:
    flow: int  # 1-based flow index
    nodes: tuple[int, ...]
    links: tuple[int, ...]  # 1-based link ids, one per hop
    discarded: tuple[int, ...] = ()  # selected links not on the path


@dataclass(frozen=True)
class RouteResult:
    app: str
    paths: tuple[RoutePath, ...]
    objective_value: Fraction | None
    outcome: SolveOutcome

    @property
    def routed(self) -> bool:
        return self.outcome.lfm is not None

    @property
    def status(self) -> str:
        if self.routed:
            return self.outcome.status
        return "timeout" if self.outcome.status == "timeout" else "no-route"


def least_cost_model(g: NetworkGraph, flows: FlowSpec, objective: str = "auto") -> ConstraintModel:
    """Conservation plus path cost.

    ``objective`` is ``"first"`` (Cost[1] only), ``"sum"`` (all flows) or
    ``"auto"``: the first flow's cost for one flow, the sum otherwise.
    """
    if flows.n_flows < 1:
        raise ModelError("least cost routing needs at least one flow")
    m = P.path_cost(P.network_path(P.new_model(g, flows)))
    if objective == "auto":
        objective = "first" if flows.n_flows == 1 else "sum"
    expr = P.Var("Cost", 1) if objective == "first" else P.Sum("Cost")
    return P.set_objective(m, "minimize", expr)


def least_cost_capacity_model(g: NetworkGraph, flows: FlowSpec, objective: str = "auto") -> ConstraintModel:
    if flows.limits is None:
        raise ModelError("capacity-constrained routing needs per-flow limits")
    if flows.n_flows < 1:
        raise ModelError("least cost routing needs at least one flow")
    m = P.path_capacity_constraint(P.path_cost(P.network_path(P.new_model(g, flows))))
    if objective == "auto":
        objective = "first" if flows.n_flows == 1 else "sum"
    expr = P.Var("Cost", 1) if objective == "first" else P.Sum("Cost")
    return P.set_objective(m, "minimize", expr)


def max_residual_model(g: NetworkGraph, flows: FlowSpec) -> ConstraintModel:
    """Place all flows jointly to maximize the smallest residual capacity."""
    if flows.n_flows < 1:
        raise ModelError("max residual routing needs at least one flow")
    m = P.residual_capacity(P.network_path(P.new_model(g, flows)))
    m = P.require(m, "Residuals", ">=", 0)
    return P.set_objective(m, "maximize", P.Min("Residuals"))


APP_MODELS = {
    "lcp": least_cost_model,
    "lccc": least_cost_capacity_model,
    "mrc": max_residual_model,
}


def build_model(app: str, g: NetworkGraph, flows: FlowSpec) -> ConstraintModel:
    try:
        return APP_MODELS[app](g, flows)
    except KeyError:
        raise ValueError(f"unknown application {app!r}; choose from {sorted(APP_MODELS)}") from None


def route(app: str, g: NetworkGraph, flows: FlowSpec, config: SolverConfig | None = None) -> RouteResult:
    outcome = solve(build_model(app, g, flows), config)
    paths = ()
    if outcome.lfm is not None:
        paths = tuple(extract_path(g, flows, outcome.lfm, j) for j in range(1, flows.n_flows + 1))
    return RouteResult(app, paths, outcome.objective_value, outcome)


def least_cost_path(g, flows, config=None) -> RouteResult:
    return route("lcp", g, flows, config)


def least_cost_path_capacity(g, flows, config=None) -> RouteResult:
    return route("lccc", g, flows, config)


def max_residual_capacity(g, flows, config=None) -> RouteResult:
    return route("mrc", g, flows, config)


def extract_path(g: NetworkGraph, flows: FlowSpec, lfm: LinkFlowMembership, flow_index: int) -> RoutePath:
    """Turn one LFM column into a simple source-to-sink node sequence.

    The walk takes the lowest-numbered unused selected link at each step
    and erases any loop it closes.  Selected links left off the final path
    belong to disjoint cycles; they are reported via
    ``CycleDiscardedWarning`` and ``RoutePath.discarded``.
    """
    s, d, _ = flows.flows[flow_index - 1]
    col = np.asarray(lfm.column(flow_index))
    selected = [int(i) + 1 for i in np.flatnonzero(col)]
    for node in range(1, g.n_nodes + 1):
        balance = sum(int(col[i - 1]) for i in g.out_links(node)) - sum(
            int(col[i - 1]) for i in g.in_links(node)
        )
        if balance != (node == s) - (node == d):
            raise MalformedColumnError(
                f"flow {flow_index}: column breaks conservation at node {node}"
            )

    taken = set()
    nodes, links = [s], []
    where = {s: 0}
    v = s
    while v != d:
        nxt = next((i for i in g.out_links(v) if col[i - 1] and i not in taken), None)
        if nxt is None:
            raise MalformedColumnError(f"flow {flow_index}: walk stuck at node {v}")
        taken.add(nxt)
        v = g.links[nxt - 1].end
        if v in where:
            # erase the loop just closed
            cut = where[v]
            for u in nodes[cut + 1 :]:
                del where[u]
            del nodes[cut + 1 :]
            del links[cut:]
        else:
            where[v] = len(nodes)
            nodes.append(v)
            links.append(nxt)
    discarded = tuple(i for i in selected if i not in set(links))
    if discarded:
        warnings.warn(
            f"flow {flow_index}: discarded links {list(discarded)} forming cycles off the path",
            CycleDiscardedWarning,
            stacklevel=2,
        )
    return RoutePath(flow_index, tuple(nodes), tuple(links), discarded)


def path_column(g: NetworkGraph, path: RoutePath) -> np.ndarray:
    col = np.zeros(g.n_links, np.uint8)
    for i in path.links:
        col[i - 1] = 1
    return col
