"""Depth-first branch and bound over the LFM binaries."""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..predicates import (
    FAMILIES,
    ConstraintModel,
    LinkFlowMembership,
    ModelError,
    Var,
    evaluate,
    objective_value,
)
from .bounds import INF, PartialView, better, make_bound, static_distances
from .kernel import compile_rows, engine_class

BRANCH_ORDERS = ("source_adjacent_first", "row_order")
DIVE = "dive"  # branch value: set every free LFM entry to 0


@dataclass(frozen=True)
class SolverConfig:
    time_limit_ms: int | None = None
    branch_order: str = "source_adjacent_first"
    kernel: str | None = None  # None: whichever engine was selected at import

    def __post_init__(self):
        if self.time_limit_ms is not None and self.time_limit_ms <= 0:
            raise ValueError("time_limit_ms must be positive")
        if self.branch_order not in BRANCH_ORDERS:
            raise ValueError(f"branch_order must be one of {BRANCH_ORDERS}")


@dataclass(frozen=True)
class SolveStats:
    nodes_explored: int
    propagations: int
    wall_time_ms: float
    incumbents: tuple[Fraction, ...] = ()  # objective of each improving solution, in order


@dataclass(frozen=True)
class SolveOutcome:
    status: str  # optimal | satisfiable | unsatisfiable | timeout
    lfm: LinkFlowMembership | None
    objective_value: Fraction | None
    stats: SolveStats

    @property
    def has_solution(self) -> bool:
        return self.lfm is not None


def validate_model(model: ConstraintModel) -> None:
    for name in model.derived:
        if name not in FAMILIES:
            raise ModelError(f"unknown derived family {name!r}")
    obj = model.objective
    if obj is not None:
        if obj.sense not in ("minimize", "maximize"):
            raise ModelError(f"bad objective sense {obj.sense!r}")
        if obj.expr.name not in model.derived:
            raise ModelError(f"objective references unregistered variable {obj.expr.name}")
        if isinstance(obj.expr, Var) and not 1 <= obj.expr.index <= model.family_size(obj.expr.name):
            raise ModelError(f"{obj.expr.name}[{obj.expr.index}] out of range")
    n = model.n_vars
    for row in model.rows:
        for v, _ in row.terms:
            if not 0 <= v < n:
                raise ModelError(f"row references variable {v} outside 0..{n - 1}")


class _Deadline(Exception):
    pass


class _Search:
    def __init__(self, model: ConstraintModel, config: SolverConfig):
        self.model = model
        self.config = config
        self.engine = engine_class(config.kernel)(model.n_vars, *compile_rows(model.rows))
        self.view = PartialView(model, self.engine)
        self.sense = model.objective.sense if model.objective else None
        self.nodes = 0
        self.incumbent = None
        self.incumbent_value = None
        self.trace = []
        self.deadline = None
        if config.time_limit_ms is not None:
            self.deadline = time.monotonic() + config.time_limit_ms / 1000.0

    # -- branching ----------------------------------------------------------

    def _setup_heuristics(self):
        v = self.view
        self.hops = static_distances(v, None)
        obj = self.model.objective
        self.mode = "hops"
        if obj is not None and obj.expr.name == "Cost" and obj.sense == "minimize":
            self.mode = "cost"
            self.cost_dist = static_distances(v, v.cost)
        elif obj is not None and obj.expr.name == "Residuals" and obj.sense == "maximize":
            self.mode = "residual"

    def _frontier_branch(self):
        v = self.view
        loads = None
        for j, (s, d, demand) in enumerate(v.flows):
            end, _, seen = v.walk(j)
            if end == d:
                continue
            cands = v.open_out_links(end, j)
            if not cands:
                continue
            if self.mode == "cost":
                dist = self.cost_dist[j]
                key = lambda a: (v.end[a] in seen, v.cost[a] + dist[v.end[a]], a)
            elif self.mode == "residual":
                if loads is None:
                    loads = v.committed_loads()
                hops = self.hops[j]
                # arcs that cannot beat the incumbent go last; then shortest, then roomiest
                floor = self.incumbent_value
                key = lambda a: (
                    v.end[a] in seen,
                    floor is not None and v.cap[a] - int(loads[a]) - demand <= floor,
                    hops[v.end[a]],
                    -(v.cap[a] - int(loads[a]) - demand),
                    a,
                )
            else:
                hops = self.hops[j]
                key = lambda a: (v.end[a] in seen, hops[v.end[a]], a)
            a = min(cands, key=key)
            return v.x(a, j), (1, 0)
        return None

    def _choose(self):
        if self.config.branch_order == "source_adjacent_first":
            choice = self._frontier_branch()
            if choice is not None:
                return choice
        free = np.flatnonzero(self.view.lo != self.view.hi)
        var = int(free[0])
        if var < self.model.n_lfm and self.config.branch_order == "source_adjacent_first":
            # every walk is complete: first try closing all leftover entries at once
            return var, (DIVE, 0, 1)
        return var, (0, 1)

    def _dive(self) -> bool:
        n_lfm, engine = self.model.n_lfm, self.engine
        lo, hi = engine.lo, engine.hi
        for v in np.flatnonzero(self.view.lo[:n_lfm] != self.view.hi[:n_lfm]).tolist():
            if lo[v] != hi[v] and not engine.fix(v, 0):
                return False
        return True

    # -- bookkeeping --------------------------------------------------------

    def _all_fixed(self) -> bool:
        return self.engine.mark() == self.model.n_vars

    def _tick(self):
        self.nodes += 1
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _Deadline

    def _prune(self) -> bool:
        if self.bound is None:
            return False
        b = self.bound.value()
        if b is None:
            return False
        if b == INF or b == -INF:
            return True
        return self.incumbent_value is not None and not better(b, self.incumbent_value, self.sense)

    def _leaf(self) -> bool:
        """Record the complete assignment; True stops the search."""
        m = self.view.lo_matrix()
        lfm = LinkFlowMembership(m)
        if self.sense is None:
            self.incumbent = lfm
            return True
        value = objective_value(self.model, evaluate(self.model, m, names=(self.model.objective.expr.name,)))
        if value is None:
            return False
        if self.incumbent_value is None or better(value, self.incumbent_value, self.sense):
            self.incumbent = lfm
            self.incumbent_value = value
            self.trace.append(value)
        return False

    # -- main loop ----------------------------------------------------------

    def run(self) -> str:
        engine = self.engine
        self.nodes = 1
        if not engine.propagate_all():
            return "exhausted"
        self._setup_heuristics()
        self.bound = make_bound(self.view)
        stack = []  # frames: [trail mark, var, values, next value index]
        try:
            descend = True
            while True:
                if descend:
                    if self._prune():
                        pass
                    elif self._all_fixed():
                        if self._leaf():
                            return "stopped"
                    else:
                        var, values = self._choose()
                        stack.append([engine.mark(), var, values, 0])
                # take the next untried value of the deepest open frame
                descend = False
                while stack:
                    frame = stack[-1]
                    if frame[3] == len(frame[2]):
                        stack.pop()
                        continue
                    engine.undo(frame[0])
                    value = frame[2][frame[3]]
                    frame[3] += 1
                    self._tick()
                    ok = self._dive() if value is DIVE else engine.fix(frame[1], value)
                    if ok:
                        descend = True
                        break
                if not descend:
                    return "exhausted"
        except _Deadline:
            return "timeout"


def solve(model: ConstraintModel, config: SolverConfig | None = None) -> SolveOutcome:
    """Optimize (or satisfy) ``model``.

    With a time limit, the best solution found so far comes back with
    status ``timeout``.
    """
    config = config or SolverConfig()
    validate_model(model)
    t0 = time.perf_counter()
    search = _Search(model, config)
    end = search.run()
    elapsed = (time.perf_counter() - t0) * 1000.0
    stats = SolveStats(search.nodes, search.engine.propagations, elapsed, tuple(search.trace))
    lfm = search.incumbent
    if end == "timeout":
        status = "timeout"
    elif lfm is None:
        status = "unsatisfiable"
    elif model.objective is None:
        status = "satisfiable"
    else:
        status = "optimal"
    return SolveOutcome(status, lfm, search.incumbent_value, stats)


def propagate(assignment, constraints, kernel: str | None = None, n_vars: int | None = None):
    """Bounds-consistency fixpoint under a partial assignment.

    ``constraints`` is a model or a sequence of rows (then ``n_vars``
    defaults to one past the largest index used).  ``assignment`` maps
    variable index to 0/1.  Returns ``(lo, hi)`` numpy arrays, or ``None``
    when some domain empties.
    """
    if isinstance(constraints, ConstraintModel):
        rows, n = constraints.rows, constraints.n_vars
    else:
        rows = tuple(constraints)
        n = max((v + 1 for r in rows for v, _ in r.terms), default=0)
    if n_vars is not None:
        n = n_vars
    engine = engine_class(kernel)(n, *compile_rows(rows))
    lo, hi = engine.lo, engine.hi
    for v, val in sorted(assignment.items()):
        if val not in (0, 1):
            raise ValueError(f"variable {v}: value must be 0 or 1")
        if lo[v] == hi[v]:
            if lo[v] != val:
                return None
            continue
        if val:
            lo[v] = 1
        else:
            hi[v] = 0
    if not engine.propagate_all():
        return None
    return np.frombuffer(engine.lo, np.uint8).copy(), np.frombuffer(engine.hi, np.uint8).copy()
