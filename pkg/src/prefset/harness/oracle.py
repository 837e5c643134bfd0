"""Exhaustive reference solvers. Slow on purpose: they share no search code with the engines."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from ..prefmodel import preferred_value_order, topo_property_order
from ..problem import Problem

TOL = 1e-9


class GuardExceeded(ValueError):
    pass


@dataclass
class OracleResult:
    value: float | None
    assignment: dict | None
    witness: frozenset | None
    optimal_count: int = 0

    @property
    def feasible(self) -> bool:
        return self.witness is not None


def _subsets(n: int, k: int | None):
    """Every subset (as a sorted index tuple) of the allowed sizes."""
    sizes = range(n + 1) if k is None else ([k] if 0 <= k <= n else [])
    for s in sizes:
        yield from combinations(range(n), s)


class _Evaluator:
    """Per-item formula truth computed here, independently of the catalog's mask cache."""

    def __init__(self, problem: Problem):
        from ..catalog import eval_formula

        self.problem = problem
        self.rows = []
        for p in problem.props:
            masks = []
            for f in p.formulas:
                m = 0
                for i, it in enumerate(problem.catalog.items):
                    if eval_formula(f, it):
                        m |= 1 << i
                masks.append(m)
            self.rows.append((p, masks))

    def __call__(self, subset: tuple) -> dict:
        sel = 0
        for i in subset:
            sel |= 1 << i
        return {p.id: p.value_from_counts(*[(m & sel).bit_count() for m in masks]) for p, masks in self.rows}


def _value(problem: Problem, a: dict) -> float:
    total = 0
    for f in problem.model.gai.factors:
        total += f.table[tuple(a[p] for p in f.scope)]
    return total


def brute_force_gai(problem: Problem, n_guard: int = 20) -> OracleResult:
    """Maximum value over all subsets; witness is the lexicographically smallest maximizer."""
    n = problem.n
    if n > n_guard:
        raise GuardExceeded(f"{n} items exceed the oracle guard of {n_guard}")
    best = None
    best_subset = None
    best_assign = None
    count = 0
    evaluate = _Evaluator(problem)
    for subset in _subsets(n, problem.cardinality):
        a = evaluate(subset)
        v = _value(problem, a)
        if best is None or v > best + TOL:
            best, best_subset, best_assign, count = v, subset, a, 1
        elif abs(v - best) <= TOL:
            count += 1
            if subset < best_subset:
                best_subset, best_assign = subset, a
    if best is None:
        return OracleResult(None, None, None, 0)
    return OracleResult(best, best_assign, frozenset(best_subset), count)


def achievable_assignments(problem: Problem, n_guard: int = 20) -> dict:
    """Map each achievable full assignment (tuple in property order) to its smallest witness."""
    n = problem.n
    if n > n_guard:
        raise GuardExceeded(f"{n} items exceed the oracle guard of {n_guard}")
    ids = [p.id for p in problem.props]
    out: dict = {}
    evaluate = _Evaluator(problem)
    for subset in _subsets(n, problem.cardinality):
        a = evaluate(subset)
        key = tuple(a[i] for i in ids)
        if key not in out or subset < out[key]:
            out[key] = subset
    return out


def brute_force_tcp(problem: Problem, n_guard: int = 20) -> OracleResult:
    """First achievable full assignment in conditional-lexicographic order of the net."""
    net = problem.model.tcp
    if net is None:
        raise ValueError("model has no TCP-net")
    ids = [p.id for p in problem.props]
    table = achievable_assignments(problem, n_guard)
    order = topo_property_order(net)
    pos = {pid: i for i, pid in enumerate(ids)}
    prefixes = set()
    for key in table:
        for d in range(len(order) + 1):
            prefixes.add(tuple(key[pos[q]] for q in order[:d]))

    def walk(ctx: dict, depth: int):
        if depth == len(order):
            return ctx
        pid = order[depth]
        for v in preferred_value_order(net, pid, ctx, problem.n):
            nxt = dict(ctx)
            nxt[pid] = v
            if tuple(nxt[q] for q in order[: depth + 1]) in prefixes:
                return walk(nxt, depth + 1)
        return None

    found = walk({}, 0) if table else None
    if found is None:
        return OracleResult(None, None, None, 0)
    key = tuple(found[i] for i in ids)
    a = {i: found[i] for i in ids}
    return OracleResult(_value(problem, a), a, frozenset(table[key]), 1)
