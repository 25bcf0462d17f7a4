"""Solve time against network size and concurrent flow count, as CSV.

Each cell (size, flow count) is solved ``repetitions`` times.  The timed
span covers model construction, solving and path extraction.  Known
optima double as canaries: a record that contradicts one aborts the run.
"""

from __future__ import annotations

import csv
import io
import random
import statistics
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields
from fractions import Fraction

from .apps import APP_MODELS, CycleDiscardedWarning, route
from .predicates import FlowSpec, format_rational
from .solver import SolverConfig
from .topogen import (
    DEFAULT_CAPACITY,
    FatTreeSpec,
    GridSpec,
    fat_tree,
    fat_tree_endpoints,
    grid,
    grid_diagonal_endpoints,
)

TOPOLOGIES = ("grid", "fat-tree")


class PlanError(ValueError):
    pass


class CanaryFailure(AssertionError):
    pass


@dataclass(frozen=True)
class BenchPlan:
    app: str
    topology: str
    sizes: tuple[int, ...]  # grid orders or fat-tree k values
    flow_counts: tuple[int, ...] = (1,)
    demand: int = 10
    capacity: int = DEFAULT_CAPACITY
    limit: int = 10  # per-flow floor, used by lccc only
    repetitions: int = 5
    time_limit_ms: int | None = None
    random_endpoints: bool = False
    seed: int = 0
    parallel: bool = False
    kernel: str | None = None

    def __post_init__(self):
        if self.app not in APP_MODELS:
            raise PlanError(f"unknown app {self.app!r}")
        if self.topology not in TOPOLOGIES:
            raise PlanError(f"unknown topology {self.topology!r}")
        if not self.sizes:
            raise PlanError("size list is empty")
        if not self.flow_counts:
            raise PlanError("flow count list is empty")
        if any(f < 1 for f in self.flow_counts):
            raise PlanError("flow counts must be >= 1")
        if self.repetitions < 1:
            raise PlanError("repetitions must be >= 1")
        if self.demand <= 0 or self.capacity < 0 or self.limit < 0:
            raise PlanError("demand must be positive; capacity and limit non-negative")
        # validate every size up front rather than mid-run
        for size in self.sizes:
            try:
                _spec(self.topology, size, self.capacity)
            except ValueError as exc:
                raise PlanError(str(exc)) from None

    def cells(self):
        return [(size, f) for size in self.sizes for f in self.flow_counts]


@dataclass(frozen=True)
class BenchRecord:
    app: str
    topology: str
    n_nodes: int
    n_links: int
    n_flows: int
    repetition: int
    status: str
    objective: str  # "p/q", empty without a solution
    solve_time_ms: float
    nodes_explored: int

    def sort_key(self):
        return (self.app, self.topology, self.n_nodes, self.n_flows, self.repetition)


CSV_COLUMNS = tuple(f.name for f in fields(BenchRecord))


def _spec(topology, size, capacity):
    if topology == "grid":
        return GridSpec(size, capacity)
    return FatTreeSpec(size, capacity)


def _instance(plan: BenchPlan, size: int, n_flows: int, repetition: int):
    spec = _spec(plan.topology, size, plan.capacity)
    if plan.topology == "grid":
        g = grid(spec)
        pool = list(range(1, g.n_nodes + 1))
        fixed = grid_diagonal_endpoints(spec)
    else:
        ft = fat_tree(spec)
        g = ft.graph
        pool = ft.nodes_with_role("host")
        fixed = fat_tree_endpoints(spec)
    if plan.random_endpoints:
        rng = random.Random(f"{plan.seed}:{size}:{n_flows}:{repetition}")
        pairs = [tuple(rng.sample(pool, 2)) for _ in range(n_flows)]
    else:
        pairs = [fixed] * n_flows
    flows = FlowSpec(
        tuple((s, d, plan.demand) for s, d in pairs),
        tuple([plan.limit] * n_flows),
    )
    return g, flows


def expected_objective(plan: BenchPlan, size: int, n_flows: int) -> Fraction | None:
    """Known optimum for fixed endpoints with unit costs, else ``None``."""
    if plan.random_endpoints:
        return None
    hops = 2 * (size - 1) if plan.topology == "grid" else 6
    if plan.app == "lcp" or (plan.app == "lccc" and plan.limit <= plan.capacity):
        return Fraction(n_flows * hops)
    if plan.app == "mrc" and n_flows == 1 and plan.demand <= plan.capacity:
        return Fraction(plan.capacity - plan.demand)
    return None


def _run_cell(plan: BenchPlan, size: int, n_flows: int, repetition: int) -> BenchRecord:
    config = SolverConfig(time_limit_ms=plan.time_limit_ms, kernel=plan.kernel)
    g, flows = _instance(plan, size, n_flows, repetition)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CycleDiscardedWarning)
        t0 = time.perf_counter()
        result = route(plan.app, g, flows, config)
        elapsed = (time.perf_counter() - t0) * 1000.0
    q = result.objective_value
    want = expected_objective(plan, size, n_flows)
    if want is not None and result.status == "optimal" and q != want:
        raise CanaryFailure(
            f"{plan.app} on {plan.topology} size {size} with {n_flows} flows: "
            f"objective {q} but the known optimum is {want}"
        )
    return BenchRecord(
        plan.app,
        plan.topology,
        g.n_nodes,
        g.n_links,
        n_flows,
        repetition,
        result.status,
        "" if q is None else format_rational(q),
        round(elapsed, 3),
        result.outcome.stats.nodes_explored,
    )


def _run_task(task):
    return _run_cell(*task)


def write_csv(records, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(astuple(r))


def run_bench(plan: BenchPlan, out_path: str | None = None) -> list[BenchRecord]:
    """Run every (cell, repetition) and write the sorted CSV.

    ``out_path=None`` writes the CSV to standard output.
    """
    tasks = [(plan, size, f, rep) for size, f in plan.cells() for rep in range(1, plan.repetitions + 1)]
    if plan.parallel:
        with ProcessPoolExecutor() as pool:
            records = list(pool.map(_run_task, tasks))
    else:
        records = [_run_task(t) for t in tasks]
    records.sort(key=BenchRecord.sort_key)
    if out_path is None:
        write_csv(records, sys.stdout)
    else:
        with open(out_path, "w", newline="", encoding="utf-8") as fh:
            write_csv(records, fh)
    return records


@dataclass(frozen=True)
class CellSummary:
    app: str
    topology: str
    n_nodes: int
    n_flows: int
    runs: int
    timeouts: int
    median_ms: float | None  # over non-timeout runs
    min_ms: float | None
    max_ms: float | None


def summarize(records) -> list[CellSummary]:
    """Per-cell median/min/max; timed-out runs are only counted."""
    records = list(records)
    if not records:
        raise PlanError("no records to summarize")
    groups = {}
    for r in records:
        groups.setdefault((r.app, r.topology, r.n_nodes, r.n_flows), []).append(r)
    out = []
    for key in sorted(groups):
        rs = groups[key]
        times = [r.solve_time_ms for r in rs if r.status != "timeout"]
        out.append(
            CellSummary(
                *key,
                runs=len(rs),
                timeouts=len(rs) - len(times),
                median_ms=statistics.median(times) if times else None,
                min_ms=min(times) if times else None,
                max_ms=max(times) if times else None,
            )
        )
    return out


def format_summary(summary) -> str:
    buf = io.StringIO()
    buf.write(f"{'app':5} {'topology':9} {'nodes':>6} {'flows':>5} {'runs':>4} {'t/o':>4} "
              f"{'median_ms':>10} {'min_ms':>10} {'max_ms':>10}\n")

    def ms(v):
        return f"{v:10.3f}" if v is not None else f"{'-':>10}"

    for c in summary:
        buf.write(f"{c.app:5} {c.topology:9} {c.n_nodes:6d} {c.n_flows:5d} {c.runs:4d} {c.timeouts:4d} "
                  f"{ms(c.median_ms)} {ms(c.min_ms)} {ms(c.max_ms)}\n")
    return buf.getvalue()
