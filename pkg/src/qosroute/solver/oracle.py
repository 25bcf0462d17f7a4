"""Exhaustive enumeration of every binary LFM, for verification.

The oracle never looks at the solver's linearization rows.  It checks the
literal rows (conservation, capacity floors) and evaluates the derived
families straight from their definitions: residual = capacity - load or
the idle sentinel, and so on.  Enumeration is factorized by flow column:
each column's 2^L vectors are filtered by the rows local to that column,
then surviving columns are crossed.  That visits exactly the matrices a
flat 2^(L*F) sweep would accept.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from ..predicates import (
    ConstraintModel,
    LinkFlowMembership,
    evaluate,
    expr_value,
    objective_value,
    requirements_hold,
)
from .search import validate_model

MAX_ORACLE_VARS = 24
_CHUNK = 1 << 15


class OracleTooLarge(ValueError):
    pass


def _vectors(n: int, first: int, stop: int) -> np.ndarray:
    codes = np.arange(first, stop, dtype=np.int64)
    return ((codes[:, None] >> np.arange(n)) & 1).astype(np.int64)


def _row_ok(activity, row):
    ok = np.ones(activity.shape, bool)
    if row.lo is not None:
        ok &= activity >= row.lo
    if row.hi is not None:
        ok &= activity <= row.hi
    return ok


def _columns(model: ConstraintModel):
    """Per-column survivors plus the literal rows spanning several columns."""
    L, F = model.n_links, model.n_flows
    local = [[] for _ in range(F)]
    spanning = []
    for row in model.rows:
        if not row.literal:
            continue
        cols = {v % F for v, _ in row.terms} if F else set()
        if any(v >= model.n_lfm for v, _ in row.terms):
            raise ValueError("literal rows may only reference LFM entries")
        if len(cols) == 1:
            local[cols.pop()].append(row)
        elif not cols:
            # constant row: either always or never satisfied
            if not _row_ok(np.zeros(1, np.int64), row)[0]:
                return None, spanning
        else:
            spanning.append(row)
    coefs = []
    for j in range(F):
        mats = []
        for row in local[j]:
            coef = np.zeros(L, np.int64)
            for v, c in row.terms:
                coef[v // F] += c
            mats.append((coef, row))
        coefs.append(mats)
    survivors = [[] for _ in range(F)]
    for first in range(0, 1 << L, _CHUNK):
        vectors = _vectors(L, first, min(1 << L, first + _CHUNK))
        for j in range(F):
            keep = np.ones(len(vectors), bool)
            for coef, row in coefs[j]:
                keep &= _row_ok(vectors @ coef, row)
            survivors[j].append(vectors[keep])
    survivors = [np.concatenate(parts) for parts in survivors]
    return survivors, spanning


def oracle_enumerate(model: ConstraintModel) -> dict:
    """Map every satisfying LFM to its objective value (``None`` without one)."""
    validate_model(model)
    L, F = model.n_links, model.n_flows
    if L * F > MAX_ORACLE_VARS:
        raise OracleTooLarge(
            f"{L} links x {F} flows = {L * F} binaries exceeds oracle cap of {MAX_ORACLE_VARS}"
        )
    if F == 0:
        m = np.zeros((L, 0), np.uint8)
        values = evaluate(model, m)
        if not requirements_hold(model, values):
            return {}
        return {LinkFlowMembership(m): objective_value(model, values)}

    survivors, spanning = _columns(model)
    if survivors is None or any(len(s) == 0 for s in survivors):
        return {}
    sizes = [len(s) for s in survivors]
    total = int(np.prod(sizes))
    demands = np.array(model.flows.demands, dtype=np.int64)
    caps = model.graph.capacities
    costs = model.graph.costs
    big = model.max_sentinel
    obj = model.objective
    integer_only = all(name in ("Residuals", "Cost") for name in model.derived)

    found = {}
    for first in range(0, total, _CHUNK):
        idx = np.unravel_index(np.arange(first, min(total, first + _CHUNK)), sizes)
        # cube[c, i, j] = LFM[i, j] of combination c
        cube = np.stack([survivors[j][idx[j]] for j in range(F)], axis=2)
        ok = np.ones(cube.shape[0], bool)
        flat = cube.reshape(cube.shape[0], L * F)
        for row in spanning:
            act = np.zeros(cube.shape[0], np.int64)
            for v, c in row.terms:
                act += c * flat[:, v]
            ok &= _row_ok(act, row)
        loads = cube @ demands
        used = cube.any(axis=2)
        residuals = np.where(used, caps - loads, big)
        for req in model.requirements:
            ok &= (residuals > req.value).all(axis=1) if req.op == ">" else (residuals >= req.value).all(axis=1)
        families = {
            "Residuals": residuals,
            "Cost": np.einsum("cif,i->cf", cube, costs),
        }
        for c in np.flatnonzero(ok):
            m = cube[c].astype(np.uint8)
            if obj is None:
                value = None
            elif integer_only:
                value = expr_value(obj.expr, [int(x) for x in families[obj.expr.name][c]])
            else:
                vals = evaluate(model, m)
                if not requirements_hold(model, vals):
                    continue
                value = objective_value(model, vals)
            found[LinkFlowMembership(m)] = value
    return found


def oracle_optimum(model: ConstraintModel):
    """``(best value, sorted optimal LFMs)``, or ``None`` when unsatisfiable.

    For a pure satisfaction model the value is ``None`` and every
    satisfying LFM is returned.
    """
    found = oracle_enumerate(model)
    if not found:
        return None
    obj = model.objective
    if obj is None:
        return None, sorted(found, key=lambda m: m.matrix.tobytes())
    scored = {m: v for m, v in found.items() if v is not None}
    if not scored:
        return None
    pick = min if obj.sense == "minimize" else max
    best = pick(scored.values())
    winners = sorted((m for m, v in scored.items() if v == best), key=lambda m: m.matrix.tobytes())
    return Fraction(best), winners
