import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import conserving_columns, random_graph, triangle
from qosroute import predicates as P
from qosroute.apps import build_model
from qosroute.netgraph import Link, NetworkGraph
from qosroute.predicates import FlowSpec, ModelError
from qosroute.solver import (
    OracleTooLarge,
    SolverConfig,
    oracle_enumerate,
    oracle_optimum,
    solve,
    validate_model,
)
from qosroute.solver.bounds import sharing_cap
from qosroute.solver.kernel import ENGINES
from qosroute.topogen import FatTreeSpec, GridSpec, fat_tree, fat_tree_endpoints, grid


def lcp(g, flows):
    return build_model("lcp", g, FlowSpec(flows))


# -- solve ------------------------------------------------------------------------------


def test_triangle_least_cost_is_direct_arc():
    g = triangle()
    out = solve(lcp(g, [(1, 3, 10)]))
    assert out.status == "optimal"
    assert out.objective_value == 1
    assert out.lfm.selected_links(1) == [g.link_id(1, 3)]


def test_unsatisfiable_capacity():
    g = NetworkGraph(2, (Link(1, 2, 10, 1),))
    model = P.link_capacity_constraint(P.network_path(P.new_model(g, FlowSpec([(1, 2, 20)]))))
    out = solve(model)
    assert out.status == "unsatisfiable" and out.lfm is None and out.objective_value is None


def test_mrc_fat_tree_k2():
    spec = FatTreeSpec(2)
    s, d = fat_tree_endpoints(spec)
    out = solve(build_model("mrc", fat_tree(spec).graph, FlowSpec([(s, d, 10)])))
    assert out.status == "optimal" and out.objective_value == 990


def test_satisfaction_model_reports_satisfiable():
    out = solve(P.network_path(P.new_model(triangle(), FlowSpec([(1, 3, 1)]))))
    assert out.status == "satisfiable" and out.objective_value is None
    assert frozenset(out.lfm.selected_links(1)) in conserving_columns(triangle(), 1, 3)


def test_optimal_value_matches_lfm():
    g = grid(GridSpec(4))
    out = solve(lcp(g, [(1, 16, 5), (4, 13, 5)]))
    model = lcp(g, [(1, 16, 5), (4, 13, 5)])
    assert out.objective_value == P.objective_value(model, P.evaluate(model, out.lfm))
    assert out.objective_value == 12


def test_malformed_model_rejected_before_search():
    model = P.network_path(P.new_model(triangle(), FlowSpec([(1, 3, 1)])))
    bad = P.replace(model, objective=P.Objective("minimize", P.Var("Cost", 1)))
    with pytest.raises(ModelError):
        validate_model(bad)
    with pytest.raises(ModelError):
        solve(bad)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(time_limit_ms=0)
    with pytest.raises(ValueError):
        SolverConfig(branch_order="random")


@pytest.mark.parametrize("order", ["source_adjacent_first", "row_order"])
@pytest.mark.parametrize("kernel", sorted(ENGINES))
def test_branch_orders_and_kernels_agree_with_oracle(order, kernel):
    rng = random.Random(17)
    for _ in range(60):
        g = random_graph(rng)
        flows = FlowSpec([tuple(rng.sample(range(1, g.n_nodes + 1), 2)) + (rng.randint(1, 10),)], [rng.randint(0, 20)])
        for app in ("lcp", "lccc", "mrc"):
            model = build_model(app, g, flows)
            expected = oracle_optimum(model)
            out = solve(model, SolverConfig(branch_order=order, kernel=kernel))
            assert out.objective_value == (None if expected is None else expected[0])
            if expected is not None:
                assert out.lfm in expected[1]


def test_incumbents_strictly_improve():
    rng = random.Random(2)
    seen_chain = False
    for _ in range(100):
        g = random_graph(rng)
        flows = FlowSpec([tuple(rng.sample(range(1, g.n_nodes + 1), 2)) + (rng.randint(1, 10),) for _ in range(2)])
        for app, better in (("lcp", lambda a, b: a < b), ("mrc", lambda a, b: a > b)):
            trace = solve(build_model(app, g, flows), SolverConfig(branch_order="row_order")).stats.incumbents
            seen_chain |= len(trace) > 1
            assert all(better(b, a) for a, b in zip(trace, trace[1:]))
    assert seen_chain


def test_timeout_returns_incumbent():
    ft = fat_tree(FatTreeSpec(6)).graph
    flows = FlowSpec([(46, 68, 231), (46, 66, 304), (47, 65, 287), (47, 94, 348), (48, 91, 352), (48, 92, 218)])
    model = build_model("mrc", ft, flows)
    out = solve(model, SolverConfig(time_limit_ms=50))
    assert out.status == "timeout"
    assert out.lfm is not None
    assert out.objective_value == P.objective_value(model, P.evaluate(model, out.lfm))
    assert out.stats.wall_time_ms < 1000


def test_deterministic_outcome():
    g = grid(GridSpec(5))
    model = build_model("mrc", g, FlowSpec([(1, 25, 10), (5, 21, 10), (1, 25, 30)]))
    a, b = solve(model), solve(model)
    assert (a.status, a.lfm, a.objective_value, a.stats.nodes_explored, a.stats.propagations) == (
        b.status, b.lfm, b.objective_value, b.stats.nodes_explored, b.stats.propagations
    )


def test_composed_delay_minimization():
    """Least total queueing delay: flows spread out because delay grows with load."""
    from helpers import diamond

    g = diamond(capacity=100)
    flows = FlowSpec([(1, 4, 40), (1, 4, 40)])
    model = P.set_objective(P.delay(P.network_path(P.new_model(g, flows))), "minimize", P.Sum("Delay"))
    out = solve(model)
    expected = oracle_optimum(model)
    assert out.status == "optimal"
    assert out.objective_value == expected[0] == Fraction(4, 60)
    assert out.lfm in expected[1]
    assert out.lfm.selected_links(1) != out.lfm.selected_links(2)


def test_composed_objectives_agree_with_oracle():
    rng = random.Random(8)
    objectives = [
        ("delay", "minimize", P.Sum("Delay")),
        ("congestion", "minimize", P.Sum("Congestion")),
        ("link_utilisation", "minimize", P.Sum("Utilisation")),
        ("congestion", "maximize", P.Min("Residuals")),
        ("link_capacity_constraint", "maximize", P.Sum("Residuals")),
    ]
    for _ in range(40):
        g = random_graph(rng, cap=(5, 20))
        flows = FlowSpec([tuple(rng.sample(range(1, g.n_nodes + 1), 2)) + (rng.randint(1, 6),) for _ in range(2)])
        for pred, sense, expr in objectives:
            model = P.set_objective(P.PREDICATES[pred](P.network_path(P.new_model(g, flows))), sense, expr)
            expected = oracle_optimum(model)
            out = solve(model)
            assert out.objective_value == (None if expected is None else expected[0]), (pred, sense)


# -- oracle -------------------------------------------------------------------------------


def test_oracle_free_model_counts_all_assignments():
    g = NetworkGraph(2, (Link(1, 2, 5, 1), Link(2, 1, 5, 1)))
    assert len(oracle_enumerate(P.new_model(g, FlowSpec([(1, 2, 1)])))) == 4


def test_oracle_unsat_is_empty():
    g = NetworkGraph(2, (Link(2, 1, 5, 1),))
    model = P.network_path(P.new_model(g, FlowSpec([(1, 2, 1)])))
    assert oracle_enumerate(model) == {}
    assert oracle_optimum(model) is None


def test_oracle_size_cap():
    model = lcp(grid(GridSpec(4)), [(1, 16, 1)])
    with pytest.raises(OracleTooLarge):
        oracle_enumerate(model)


def test_oracle_matches_flat_enumeration():
    """Factorized enumeration visits the same set as a plain 2^(L*F) sweep."""
    rng = random.Random(4)
    for _ in range(15):
        g = random_graph(rng, max_links=5)
        flows = FlowSpec([tuple(rng.sample(range(1, g.n_nodes + 1), 2)) + (rng.randint(1, 10),) for _ in range(2)])
        model = build_model("mrc", g, flows)
        L, F = model.n_links, model.n_flows
        flat = {}
        for code in range(1 << (L * F)):
            m = np.array([(code >> b) & 1 for b in range(L * F)], np.int64).reshape(L, F)
            ok = all(
                (r.lo is None or sum(c * m.flat[v] for v, c in r.terms) >= r.lo)
                and (r.hi is None or sum(c * m.flat[v] for v, c in r.terms) <= r.hi)
                for r in model.rows
                if r.literal
            )
            vals = P.evaluate(model, m)
            if ok and P.requirements_hold(model, vals):
                flat[P.LinkFlowMembership(m.astype(np.uint8))] = P.objective_value(model, vals)
        assert oracle_enumerate(model) == flat


# -- bounds ---------------------------------------------------------------------------


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.integers(0, 60), min_size=1, max_size=4),
    st.lists(st.integers(1, 25), min_size=1, max_size=3),
)
def test_sharing_cap_is_admissible(residuals, demands):
    """No assignment of flows to links beats the cap."""
    import itertools

    cap = sharing_cap(residuals, demands)
    best = None
    for choice in itertools.product(range(len(residuals)), repeat=len(demands)):
        load = [0] * len(residuals)
        for link, dem in zip(choice, demands):
            load[link] += dem
        value = min(r - load[i] for i, r in enumerate(residuals) if load[i])
        best = value if best is None else max(best, value)
    assert cap >= best
