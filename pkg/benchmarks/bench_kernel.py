"""Compare the compiled and pure-Python propagation engines.

Two measurements per engine:

* replay: a fixed random fix/undo walk over a model's rows, timed in isolation;
* solve: end-to-end ``route`` calls on grid and fat-tree instances.

Run with ``python benchmarks/bench_kernel.py [--repeat N]``.
"""

import argparse
import random
import statistics
import time

from qosroute.apps import build_model, route
from qosroute.predicates import FlowSpec
from qosroute.solver import SolverConfig
from qosroute.solver.kernel import ENGINES, compile_rows
from qosroute.topogen import FatTreeSpec, GridSpec, fat_tree, fat_tree_endpoints, grid


def walk(n_vars, steps, seed):
    """Pre-drawn (var, value, undo?) choices so both engines replay the same work."""
    rng = random.Random(seed)
    return [(rng.randrange(n_vars), rng.randint(0, 1), rng.random() < 0.35) for _ in range(steps)]


def replay(engine_cls, model, arrays, moves):
    engine = engine_cls(model.n_vars, *arrays)
    engine.propagate_all()
    base = engine.mark()
    marks = []
    t0 = time.perf_counter()
    for var, value, back in moves:
        if back and marks:
            engine.undo(marks.pop())
            continue
        if engine.lo[var] != engine.hi[var]:
            marks.append(engine.mark())
            if not engine.fix(var, value):
                engine.undo(marks.pop())
        elif len(marks) > 20:
            engine.undo(base)
            marks.clear()
    return time.perf_counter() - t0, engine.propagations


def instances():
    ft6 = FatTreeSpec(6)
    s, d = fat_tree_endpoints(ft6)
    ft4 = fat_tree(FatTreeSpec(4))
    hosts = ft4.nodes_with_role("host")
    return [
        ("lcp grid 12", "lcp", grid(GridSpec(12)), FlowSpec([(1, 144, 10)])),
        ("lccc fat-tree 6", "lccc", fat_tree(ft6).graph, FlowSpec([(s, d, 10)], [10])),
        ("mrc fat-tree 4 x3", "mrc", ft4.graph,
         FlowSpec([(hosts[0], hosts[15], 10), (hosts[1], hosts[14], 20), (hosts[4], hosts[11], 30)])),
        ("mrc fat-tree 6 x5", "mrc", fat_tree(ft6).graph, FlowSpec([(s, d, 10)] * 5)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--steps", type=int, default=20000)
    args = ap.parse_args(argv)
    names = sorted(ENGINES)
    if "cython" not in ENGINES:
        print("compiled kernel not built; only the Python engine is available")

    print(f"{'replay':<22}" + "".join(f"{n:>14}" for n in names) + f"{'speedup':>10}")
    for label, app, g, flows in instances():
        model = build_model(app, g, flows)
        arrays = compile_rows(model.rows)
        moves = walk(model.n_vars, args.steps, seed=1)
        times = {}
        for n in names:
            runs = [replay(ENGINES[n], model, arrays, moves) for _ in range(args.repeat)]
            assert len({p for _, p in runs}) == 1
            times[n] = statistics.median(t for t, _ in runs)
        print(f"{label:<22}" + "".join(f"{times[n] * 1e3:>12.1f}ms" for n in names) + speedup(times))

    print(f"\n{'solve':<22}" + "".join(f"{n:>14}" for n in names) + f"{'speedup':>10}")
    for label, app, g, flows in instances():
        times = {}
        for n in names:
            config = SolverConfig(kernel=n)
            runs = []
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                route(app, g, flows, config)
                runs.append(time.perf_counter() - t0)
            times[n] = statistics.median(runs)
        print(f"{label:<22}" + "".join(f"{times[n] * 1e3:>12.1f}ms" for n in names) + speedup(times))


def speedup(times):
    if "cython" in times and "python" in times:
        return f"{times['python'] / times['cython']:>9.1f}x"
    return ""


if __name__ == "__main__":
    main()
