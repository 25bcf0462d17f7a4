"""Command-line front end and the text file formats.

Graph file::

    # comment
    nodes 4
    1 2 1000 1        # start end capacity cost, one directed link per line

Flow file: one ``source sink demand [limit]`` line per flow.

Exit codes: 0 route found (or verify MATCH), 1 bad input or instance too
large, 2 no route (or verify MISMATCH), 3 timeout without any solution.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path

from .apps import APP_MODELS, CycleDiscardedWarning, RouteResult, build_model, route
from .bench import BenchPlan, CanaryFailure, PlanError, format_summary, run_bench, summarize
from .netgraph import GraphError, Link, NetworkGraph, validate_graph
from .predicates import FlowSpec, ModelError, format_rational
from .solver import OracleTooLarge, SolverConfig, oracle_optimum, solve
from .solver.kernel import ENGINES
from .solver.oracle import MAX_ORACLE_VARS
from .topogen import DEFAULT_CAPACITY, DEFAULT_COST, FatTreeSpec, GridSpec, fat_tree, grid

EXIT_OK, EXIT_INPUT, EXIT_NO_ROUTE, EXIT_TIMEOUT = 0, 1, 2, 3


class ParseError(ValueError):
    pass


# -- file formats -------------------------------------------------------------


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _ints(fields, lineno, what):
    try:
        return [int(f) for f in fields]
    except ValueError:
        raise ParseError(f"line {lineno}: {what} must be integers, got {' '.join(fields)!r}") from None


def parse_graph(text: str) -> NetworkGraph:
    """Parse a graph file; link order in the file is the LFM row order."""
    n_nodes = None
    links = []
    for lineno, fields in _content_lines(text):
        if n_nodes is None:
            if len(fields) != 2 or fields[0] != "nodes":
                raise ParseError(f"line {lineno}: expected header 'nodes N'")
            (n_nodes,) = _ints(fields[1:], lineno, "node count")
            continue
        if len(fields) != 4:
            raise ParseError(f"line {lineno}: expected 'u v capacity cost', got {len(fields)} fields")
        links.append(Link(*_ints(fields, lineno, "link fields")))
    if n_nodes is None:
        raise ParseError("missing 'nodes N' header")
    g = NetworkGraph(n_nodes, tuple(links))
    problems = validate_graph(g)
    if problems:
        raise ParseError("; ".join(problems))
    return g


def format_graph(g: NetworkGraph) -> str:
    out = [f"nodes {g.n_nodes}"]
    out += [f"{lk.start} {lk.end} {lk.capacity} {lk.cost}" for lk in g.links]
    return "\n".join(out) + "\n"


def parse_flows(text: str) -> FlowSpec:
    """Parse a flow file; a missing limit means 0."""
    flows, limits = [], []
    for lineno, fields in _content_lines(text):
        if len(fields) not in (3, 4):
            raise ParseError(f"line {lineno}: expected 's d demand [limit]'")
        vals = _ints(fields, lineno, "flow fields")
        flows.append(tuple(vals[:3]))
        limits.append(vals[3] if len(vals) == 4 else 0)
    if not flows:
        raise ParseError("flow file lists no flows")
    try:
        return FlowSpec(tuple(flows), tuple(limits))
    except ModelError as exc:
        raise ParseError(str(exc)) from None


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None


def _load_instance(args):
    g = parse_graph(_read(args.graph))
    flows = parse_flows(_read(args.flows))
    for n, (s, d, _) in enumerate(flows.flows, start=1):
        for node in (s, d):
            if not 1 <= node <= g.n_nodes:
                raise ParseError(f"flow {n}: node {node} outside 1..{g.n_nodes}")
    return g, flows


# -- rendering ----------------------------------------------------------------


def decimal_text(q: Fraction) -> str:
    """Advisory 10-significant-digit rendering of an exact rational."""
    with localcontext() as ctx:
        ctx.prec = 10
        return str(Decimal(q.numerator) / Decimal(q.denominator))


def exit_code(result: RouteResult) -> int:
    if result.routed:
        return EXIT_OK
    return EXIT_TIMEOUT if result.outcome.status == "timeout" else EXIT_NO_ROUTE


def render_text(result: RouteResult, flows: FlowSpec) -> str:
    st = result.outcome.stats
    lines = [f"app {result.app}", f"status {result.status}"]
    if result.objective_value is not None:
        q = result.objective_value
        lines.append(f"objective {format_rational(q)} {decimal_text(q)}")
    for p in result.paths:
        s, d, demand = flows.flows[p.flow - 1]
        lines.append(
            f"flow {p.flow} {s}->{d} demand {demand}: nodes {' '.join(map(str, p.nodes))}"
            f" links {' '.join(map(str, p.links))}"
        )
    lines.append(f"stats nodes_explored={st.nodes_explored} propagations={st.propagations}")
    return "\n".join(lines) + "\n"


def render_json_lines(result: RouteResult, flows: FlowSpec) -> str:
    st = result.outcome.stats
    q = result.objective_value
    paths = {p.flow: p for p in result.paths}
    out = []
    for j, (s, d, demand) in enumerate(flows.flows, start=1):
        p = paths.get(j)
        out.append(
            json.dumps(
                {
                    "app": result.app,
                    "flow": j,
                    "source": s,
                    "sink": d,
                    "demand": demand,
                    "status": result.status,
                    "objective": None if q is None else format_rational(q),
                    "objective_decimal": None if q is None else decimal_text(q),
                    "nodes": None if p is None else list(p.nodes),
                    "links": None if p is None else list(p.links),
                    "nodes_explored": st.nodes_explored,
                    "propagations": st.propagations,
                },
                sort_keys=True,
            )
        )
    return "\n".join(out) + "\n"


# -- commands -----------------------------------------------------------------


def cmd_gen(args) -> int:
    if args.topology == "grid":
        g = grid(GridSpec(args.size, args.capacity, args.cost))
    else:
        g = fat_tree(FatTreeSpec(args.size, args.capacity, args.cost)).graph
    text = format_graph(g)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        report = sys.stdout
    else:
        sys.stdout.write(text)
        report = sys.stderr
    print(f"nodes {g.n_nodes} links {g.n_links} undirected {g.n_links // 2}", file=report)
    return EXIT_OK


def _config(args) -> SolverConfig:
    return SolverConfig(
        time_limit_ms=args.time_limit_ms, branch_order=args.branch_order, kernel=args.kernel
    )


def cmd_route(args) -> int:
    g, flows = _load_instance(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", CycleDiscardedWarning)
        result = route(args.app, g, flows, _config(args))
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    render = render_json_lines if args.format == "json-lines" else render_text
    sys.stdout.write(render(result, flows))
    print(f"wall_time_ms={result.outcome.stats.wall_time_ms:.3f}", file=sys.stderr)
    return exit_code(result)


def cmd_verify(args) -> int:
    g, flows = _load_instance(args)
    model = build_model(args.app, g, flows)
    try:
        expected = oracle_optimum(model)
    except OracleTooLarge as exc:
        print(f"error: instance too large for the oracle: {exc}", file=sys.stderr)
        return EXIT_INPUT
    outcome = solve(model, _config(args))
    want = None if expected is None else expected[0]
    got = outcome.objective_value
    feasible_match = (expected is None) == (outcome.lfm is None)
    ok = feasible_match and want == got and (outcome.lfm is None or outcome.lfm in expected[1])

    def show(v, found):
        return format_rational(v) if v is not None else ("none" if not found else "n/a")

    print(
        f"{'MATCH' if ok else 'MISMATCH'} solver={show(got, outcome.lfm is not None)}"
        f" oracle={show(want, expected is not None)}"
    )
    return EXIT_OK if ok else EXIT_NO_ROUTE


def cmd_bench(args) -> int:
    plan = BenchPlan(
        app=args.app,
        topology=args.topology,
        sizes=tuple(args.sizes),
        flow_counts=tuple(args.flows),
        demand=args.demand,
        capacity=args.capacity,
        limit=args.limit,
        repetitions=args.repetitions,
        time_limit_ms=args.time_limit_ms,
        random_endpoints=args.random_endpoints,
        seed=args.seed,
        parallel=args.parallel,
        kernel=args.kernel,
    )
    records = run_bench(plan, args.out)
    if args.out is None:
        return EXIT_OK
    sys.stdout.write(format_summary(summarize(records)))
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------


def _positive(text):
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _solver_flags(p):
    p.add_argument("--time-limit-ms", type=_positive, default=None)
    p.add_argument("--branch-order", choices=("source_adjacent_first", "row_order"),
                   default="source_adjacent_first")
    p.add_argument("--kernel", choices=sorted(ENGINES), default=None,
                   help="propagation engine (default: compiled if available)")


class _Parser(argparse.ArgumentParser):
    """Usage errors exit 1 so that 2 always means "no route"."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qosroute", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="write a grid or fat-tree graph file")
    p.add_argument("topology", choices=("grid", "fat-tree"))
    p.add_argument("size", type=int, help="grid order or fat-tree k")
    p.add_argument("--capacity", type=int, default=DEFAULT_CAPACITY)
    p.add_argument("--cost", type=int, default=DEFAULT_COST)
    p.add_argument("-o", "--out", help="output path (default: standard output)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("route", help="solve a routing application")
    p.add_argument("app", choices=sorted(APP_MODELS))
    p.add_argument("graph")
    p.add_argument("flows")
    p.add_argument("--format", choices=("text", "json-lines"), default="text")
    _solver_flags(p)
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("verify", help=f"compare the solver with exhaustive enumeration "
                                      f"(at most {MAX_ORACLE_VARS} LFM entries)")
    p.add_argument("app", choices=sorted(APP_MODELS))
    p.add_argument("graph")
    p.add_argument("flows")
    _solver_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="time an application across topology sizes")
    p.add_argument("app", choices=sorted(APP_MODELS))
    p.add_argument("topology", choices=("grid", "fat-tree"))
    p.add_argument("--sizes", type=int, nargs="*", required=True)
    p.add_argument("--flows", type=int, nargs="*", default=[1])
    p.add_argument("--demand", type=int, default=10)
    p.add_argument("--capacity", type=int, default=DEFAULT_CAPACITY)
    p.add_argument("--limit", type=int, default=10)
    p.add_argument("--repetitions", type=_positive, default=5)
    p.add_argument("--time-limit-ms", type=_positive, default=None)
    p.add_argument("--random-endpoints", action="store_true",
                   help="draw a random host pair per flow instead of the fixed pair")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--parallel", action="store_true")
    p.add_argument("--kernel", choices=sorted(ENGINES), default=None)
    p.add_argument("-o", "--out", help="CSV path (default: CSV to standard output)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, GraphError, ModelError, PlanError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CanaryFailure as exc:
        print(f"canary failed: {exc}", file=sys.stderr)
        return EXIT_NO_ROUTE


if __name__ == "__main__":
    sys.exit(main())
