"""Routing constraint predicates over the link-flow-membership matrix.

A ``ConstraintModel`` is an immutable value.  Every predicate takes a model
and returns a new one with rows, derived variables or requirements added.
Predicates are idempotent, so nested predicates (delay pulls in the link
capacity constraint, which pulls in residual capacity) can be combined
freely without registering anything twice.

Decision variables are the binaries ``LFM[i, j]`` (link ``i`` carries flow
``j``, both 1-based) plus, once residual capacity is in play, one
``used[i]`` indicator per link.  Rows are linear: ``lo <= sum(c * x) <= hi``.
Rows flagged ``literal`` restate the predicates directly over the LFM;
the others are linearizations that only the search needs, and the
exhaustive oracle ignores them in favour of the semantic requirements.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .netgraph import NetworkGraph

FAMILIES = ("Residuals", "Cost", "Delay", "Congestion", "Utilisation")
# +1 if the family grows when more LFM entries are set, -1 if it shrinks
MONOTONE = {"Residuals": -1, "Cost": 1, "Delay": 1, "Congestion": 1, "Utilisation": 1}


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class FlowSpec:
    flows: tuple[tuple[int, int, int], ...]
    limits: tuple[int, ...] | None = None

    def __post_init__(self):
        flows = tuple(tuple(int(x) for x in f) for f in self.flows)
        object.__setattr__(self, "flows", flows)
        for n, (s, d, demand) in enumerate(flows, start=1):
            if s == d:
                raise ModelError(f"flow {n}: source equals sink ({s})")
            if demand <= 0:
                raise ModelError(f"flow {n}: demand must be positive, got {demand}")
        if self.limits is not None:
            limits = tuple(int(x) for x in self.limits)
            if len(limits) != len(flows):
                raise ModelError(f"{len(limits)} limits for {len(flows)} flows")
            if any(x < 0 for x in limits):
                raise ModelError("limits must be non-negative")
            object.__setattr__(self, "limits", limits)

    @property
    def n_flows(self) -> int:
        return len(self.flows)

    @property
    def sources(self) -> list[int]:
        return [f[0] for f in self.flows]

    @property
    def sinks(self) -> list[int]:
        return [f[1] for f in self.flows]

    @property
    def demands(self) -> list[int]:
        return [f[2] for f in self.flows]


class LinkFlowMembership:
    """Binary N_links x N_flows matrix; ``entry(i, j)`` is 1-based."""

    __slots__ = ("matrix", "_key")

    def __init__(self, matrix):
        m = np.array(matrix, dtype=np.uint8, copy=True)
        if m.ndim != 2:
            raise ModelError("LFM must be two-dimensional")
        if m.size and m.max() > 1:
            raise ModelError("LFM entries must be 0 or 1")
        m.setflags(write=False)
        self.matrix = m
        self._key = (m.shape, m.tobytes())

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def entry(self, i: int, j: int) -> int:
        return int(self.matrix[i - 1, j - 1])

    def column(self, j: int) -> np.ndarray:
        return self.matrix[:, j - 1]

    def selected_links(self, j: int) -> list[int]:
        return [int(i) + 1 for i in np.flatnonzero(self.matrix[:, j - 1])]

    def __eq__(self, other):
        return isinstance(other, LinkFlowMembership) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"LinkFlowMembership({self.matrix.tolist()})"


@dataclass(frozen=True)
class Row:
    terms: tuple[tuple[int, int], ...]  # (variable index, coefficient)
    lo: int | None
    hi: int | None
    kind: str
    literal: bool = True


@dataclass(frozen=True)
class Var:
    name: str
    index: int  # 1-based


@dataclass(frozen=True)
class Sum:
    name: str


@dataclass(frozen=True)
class Min:
    name: str


Expr = Union[Var, Sum, Min]


@dataclass(frozen=True)
class Objective:
    sense: str  # "minimize" | "maximize"
    expr: Expr


@dataclass(frozen=True)
class Requirement:
    name: str
    op: str  # ">" | ">="
    value: int


@dataclass(frozen=True)
class ConstraintModel:
    graph: NetworkGraph
    flows: FlowSpec
    rows: tuple[Row, ...] = ()
    derived: tuple[str, ...] = ()
    requirements: tuple[Requirement, ...] = ()
    objective: Objective | None = None
    indicators: bool = False
    applied: frozenset = field(default_factory=frozenset)

    @property
    def n_links(self) -> int:
        return self.graph.n_links

    @property
    def n_flows(self) -> int:
        return self.flows.n_flows

    @property
    def n_lfm(self) -> int:
        return self.n_links * self.n_flows

    @property
    def n_vars(self) -> int:
        return self.n_lfm + (self.n_links if self.indicators else 0)

    @property
    def max_sentinel(self) -> int:
        """Residual assigned to links that carry no flow."""
        return max((lk.capacity for lk in self.graph.links), default=0) + 1

    def x(self, i: int, j: int) -> int:
        """Variable index of LFM[i, j] (1-based arguments)."""
        return (i - 1) * self.n_flows + (j - 1)

    def used(self, i: int) -> int:
        if not self.indicators:
            raise ModelError("link-used indicators exist only after residual_capacity")
        return self.n_lfm + (i - 1)

    def family_size(self, name: str) -> int:
        return self.n_flows if name == "Cost" else self.n_links


def new_model(graph: NetworkGraph, flows: FlowSpec) -> ConstraintModel:
    return ConstraintModel(graph, flows)


def _add(model: ConstraintModel, tag: str, **changes) -> ConstraintModel:
    return replace(model, applied=model.applied | {tag}, **changes)


def register(model: ConstraintModel, name: str) -> ConstraintModel:
    if name not in FAMILIES:
        raise ModelError(f"unknown derived variable family {name!r}")
    if name in model.derived:
        raise ModelError(f"{name} is already registered")
    return replace(model, derived=model.derived + (name,))


def network_path(model: ConstraintModel) -> ConstraintModel:
    """Unit flow conservation for every node and flow.

    inflow + [node is source] == outflow + [node is sink]

    so one unit leaves each flow's source and one unit arrives at its sink.
    """
    if "network_path" in model.applied:
        return model
    g = model.graph
    for n, (s, d, _) in enumerate(model.flows.flows, start=1):
        for node in (s, d):
            if not 1 <= node <= g.n_nodes:
                raise ModelError(f"flow {n}: node {node} outside 1..{g.n_nodes}")
    rows = []
    for node in range(1, g.n_nodes + 1):
        ins, outs = g.in_links(node), g.out_links(node)
        for j, (s, d, _) in enumerate(model.flows.flows, start=1):
            terms = [(model.x(i, j), 1) for i in ins] + [(model.x(i, j), -1) for i in outs]
            terms.sort()
            rhs = (node == d) - (node == s)
            rows.append(Row(tuple(terms), rhs, rhs, "conservation"))
    return _add(model, "network_path", rows=model.rows + tuple(rows))


def path_capacity_constraint(model: ConstraintModel) -> ConstraintModel:
    """Drop links whose capacity is below a flow's limit from that flow's graph."""
    limits = model.flows.limits
    if limits is None:
        raise ModelError("path_capacity_constraint needs per-flow limits")
    if "path_capacity_constraint" in model.applied:
        return model
    rows = []
    for i, lk in enumerate(model.graph.links, start=1):
        for j, limit in enumerate(limits, start=1):
            if lk.capacity < limit:
                rows.append(Row(((model.x(i, j), 1),), 0, 0, "capacity_floor"))
    return _add(model, "path_capacity_constraint", rows=model.rows + tuple(rows))


def residual_capacity(model: ConstraintModel) -> ConstraintModel:
    """Register Residuals and the per-link used indicators behind them.

    Residuals[i] is the max-capacity sentinel on links no flow uses and
    capacity minus placed demand otherwise.
    """
    if "residual_capacity" in model.applied:
        return model
    model = register(replace(model, indicators=True), "Residuals")
    rows = []
    for i in range(1, model.n_links + 1):
        u = model.used(i)
        xs = [model.x(i, j) for j in range(1, model.n_flows + 1)]
        for x in xs:
            # used[i] >= LFM[i, j]
            rows.append(Row(tuple(sorted([(u, 1), (x, -1)])), 0, None, "link_used", False))
        # used[i] <= sum_j LFM[i, j]
        rows.append(Row(tuple(sorted([(x, 1) for x in xs] + [(u, -1)])), 0, None, "link_used", False))
    return _add(model, "residual_capacity", rows=model.rows + tuple(rows))


def require(model: ConstraintModel, name: str, op: str, value: int = 0) -> ConstraintModel:
    """Add ``name[i] op value`` for every link.

    Only lower bounds on Residuals are supported; they linearize exactly to
    a knapsack row per link, ``sum_j demand_j * LFM[i, j] <= rhs``.
    """
    if name != "Residuals" or op not in (">", ">="):
        raise ModelError(f"unsupported requirement {name} {op} {value}")
    if name not in model.derived:
        raise ModelError(f"{name} is not registered")
    req = Requirement(name, op, int(value))
    if req in model.requirements:
        return model
    floor = value + 1 if op == ">" else value
    demands = model.flows.demands
    rows = []
    for i, lk in enumerate(model.graph.links, start=1):
        rhs = max(lk.capacity - floor, 0)
        terms = tuple((model.x(i, j), demands[j - 1]) for j in range(1, model.n_flows + 1))
        rows.append(Row(terms, None, rhs, "capacity", False))
    if model.max_sentinel < floor:
        # the idle-link sentinel itself fails the bound, so every link must carry flow
        for i in range(1, model.n_links + 1):
            rows.append(Row(((model.used(i), 1),), 1, 1, "capacity", False))
    return replace(
        model,
        rows=model.rows + tuple(rows),
        requirements=model.requirements + (req,),
    )


def link_capacity_constraint(model: ConstraintModel) -> ConstraintModel:
    """Residual capacity must stay strictly positive on every link."""
    if "link_capacity_constraint" in model.applied:
        return model
    model = require(residual_capacity(model), "Residuals", ">", 0)
    return _add(model, "link_capacity_constraint")


def path_cost(model: ConstraintModel) -> ConstraintModel:
    if "path_cost" in model.applied:
        return model
    return _add(register(model, "Cost"), "path_cost")


def delay(model: ConstraintModel) -> ConstraintModel:
    """M/M/1 queueing delay per link: 0 when idle, 1 / residual otherwise."""
    if "delay" in model.applied:
        return model
    return _add(register(link_capacity_constraint(model), "Delay"), "delay")


def congestion(model: ConstraintModel) -> ConstraintModel:
    if "congestion" in model.applied:
        return model
    return _add(register(link_capacity_constraint(model), "Congestion"), "congestion")


def link_utilisation(model: ConstraintModel) -> ConstraintModel:
    """Percentage of each link's capacity taken by placed flows."""
    if "link_utilisation" in model.applied:
        return model
    bad = [i for i, lk in enumerate(model.graph.links, start=1) if lk.capacity <= 0]
    if bad:
        raise ModelError(f"link utilisation undefined for zero-capacity links {bad}")
    return _add(register(model, "Utilisation"), "link_utilisation")


def set_objective(model: ConstraintModel, sense: str, expr: Expr) -> ConstraintModel:
    if sense not in ("minimize", "maximize"):
        raise ModelError(f"objective sense must be minimize or maximize, got {sense!r}")
    if model.objective is not None:
        raise ModelError("objective already set")
    if expr.name not in model.derived:
        raise ModelError(f"objective references unregistered variable {expr.name}")
    if isinstance(expr, Var) and not 1 <= expr.index <= model.family_size(expr.name):
        raise ModelError(f"{expr.name}[{expr.index}] out of range")
    return replace(model, objective=Objective(sense, expr))


PREDICATES = {
    "network_path": network_path,
    "path_capacity_constraint": path_capacity_constraint,
    "residual_capacity": residual_capacity,
    "link_capacity_constraint": link_capacity_constraint,
    "path_cost": path_cost,
    "delay": delay,
    "congestion": congestion,
    "link_utilisation": link_utilisation,
}


# -- semantic evaluation ------------------------------------------------------


def link_loads(model: ConstraintModel, matrix: np.ndarray) -> np.ndarray:
    demands = np.array(model.flows.demands, dtype=np.int64)
    return matrix.astype(np.int64) @ demands if model.n_flows else np.zeros(model.n_links, np.int64)


def evaluate(
    model: ConstraintModel, lfm: LinkFlowMembership | np.ndarray, names=None
) -> dict:
    """Value of every registered derived family (or just ``names``) on an assignment.

    Integers for Residuals and Cost, Fractions for the rest.  A Delay or
    Congestion entry whose residual is zero is ``None``.
    """
    m = lfm.matrix if isinstance(lfm, LinkFlowMembership) else np.asarray(lfm)
    g = model.graph
    loads = link_loads(model, m)
    used = m.any(axis=1) if model.n_flows else np.zeros(model.n_links, bool)
    big = model.max_sentinel
    res = [big if not used[i] else lk.capacity - int(loads[i]) for i, lk in enumerate(g.links)]
    out = {}
    for name in model.derived if names is None else names:
        if name == "Residuals":
            out[name] = res
        elif name == "Cost":
            costs = g.costs
            out[name] = [int(costs @ m[:, j].astype(np.int64)) for j in range(model.n_flows)]
        elif name == "Delay":
            out[name] = [
                Fraction(0) if not used[i] else (Fraction(1, r) if r else None)
                for i, r in enumerate(res)
            ]
        elif name == "Congestion":
            out[name] = [Fraction(int(loads[i]), r) if r else None for i, r in enumerate(res)]
        elif name == "Utilisation":
            out[name] = [
                Fraction(100 * int(loads[i]), lk.capacity) for i, lk in enumerate(g.links)
            ]
    return out


def requirements_hold(model: ConstraintModel, values: dict) -> bool:
    for req in model.requirements:
        for v in values[req.name]:
            if v is None or not (v > req.value if req.op == ">" else v >= req.value):
                return False
    return True


def objective_value(model: ConstraintModel, values: dict) -> Fraction | None:
    obj = model.objective
    if obj is None:
        return None
    return expr_value(obj.expr, values[obj.expr.name])


def expr_value(expr: Expr, family: Sequence) -> Fraction | None:
    if isinstance(expr, Var):
        chosen = [family[expr.index - 1]]
    else:
        chosen = list(family)
    if any(v is None for v in chosen):
        return None
    if isinstance(expr, Min):
        return Fraction(min(chosen)) if chosen else None
    return Fraction(sum(chosen))


def format_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"
