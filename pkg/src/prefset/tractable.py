"""Polynomial solvers for two restricted classes of single-attribute problems.

* atomic class: one attribute, every property ``<|X = x| REL k>``; the items with
  different values never interact, so each value keeps an interval-free set of allowed
  counts and properties are settled greedily in preference order;
* one-connective class: one attribute, each value held by at most one item, every
  formula ``X = x`` or ``X = x | X = y``; committed property values become a 2-SAT
  instance over "item is selected" variables.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from .catalog import Atom, Or, atoms, connective_count, has_negation
from .prefmodel import preferred_value_order, topo_property_order
from .problem import Problem, SearchResult
from .properties import COUNT_VS_CONST, NEGATED, SetProperty, allowed_counts


class ClassError(ValueError):
    pass


@dataclass
class TractableClassProfile:
    a: int  # attributes in the schema
    k: int  # most connectives in any formula
    d: int  # largest attribute domain (integer ranges count their span)
    mu: int  # most items sharing one attribute value
    m: int
    n: int
    empties: bool  # some property formula has no satisfying item
    negation: bool
    equality_only: bool
    count_vs_const_only: bool
    cardinality: bool
    tcp: bool
    greedy_eligible: bool = False
    twosat_eligible: bool = False
    reasons: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _positive_or_of_atoms(f) -> bool:
    if isinstance(f, Atom):
        return f.rel == "="
    if isinstance(f, Or):
        return _positive_or_of_atoms(f.left) and _positive_or_of_atoms(f.right)
    return False


def check_class(problem: Problem) -> TractableClassProfile:
    cat, props = problem.catalog, problem.props
    schema = cat.schema
    d = max((len(at.domain) if at.kind != "integer" else at.hi - at.lo + 1 for at in schema.attributes), default=0)
    mu = 0
    for at in schema.attributes:
        counts: dict = {}
        for it in cat.items:
            counts[it.values[at.name]] = counts.get(it.values[at.name], 0) + 1
        mu = max([mu] + list(counts.values()))
    formulas = [f for p in props for f in p.formulas]
    prof = TractableClassProfile(
        a=len(schema.attributes),
        k=max((connective_count(f) for f in formulas), default=0),
        d=d,
        mu=mu,
        m=len(props),
        n=len(cat),
        empties=any(cat.mask(f) == 0 for f in formulas),
        negation=any(has_negation(f) for f in formulas),
        equality_only=all(a.rel == "=" for f in formulas for a in atoms(f)),
        count_vs_const_only=all(p.kind == COUNT_VS_CONST for p in props),
        cardinality=problem.cardinality is not None,
        tcp=problem.model.tcp is not None,
    )
    common = []
    if prof.a != 1:
        common.append(f"{prof.a} attributes (needs 1)")
    if not prof.count_vs_const_only:
        common.append("some property is not a count-versus-constant test")
    if prof.cardinality:
        common.append("a cardinality requirement is set")
    if not prof.tcp:
        common.append("the model is not a TCP-net")
    greedy = list(common)
    if prof.k != 0:
        greedy.append(f"formulas use {prof.k} connectives (needs 0)")
    if not prof.equality_only:
        greedy.append("some atom is not an equality")
    twosat = list(common)
    if prof.k > 1:
        twosat.append(f"formulas use {prof.k} connectives (needs at most 1)")
    if prof.negation or not all(_positive_or_of_atoms(f) for f in formulas):
        twosat.append("formulas must be positive disjunctions of equalities")
    if prof.empties:
        twosat.append("some property formula matches no item")
    if prof.mu > 1:
        twosat.append(f"an attribute value is shared by {prof.mu} items (needs 1)")
    prof.greedy_eligible = not greedy
    prof.twosat_eligible = not twosat
    prof.reasons = {"greedy": greedy, "twosat": twosat}
    return prof


# ---------------------------------------------------------------------------
# atomic class: greedy


def _allowed(p: SetProperty, v: bool, upto: int) -> set:
    rel = p.rel if v else NEGATED[p.rel]
    return allowed_counts(rel, p.k, upto)


def solve_atomic_greedy(problem: Problem) -> SearchResult:
    """Settle properties in preference order, keeping per-value sets of allowed counts."""
    prof = check_class(problem)
    if not prof.greedy_eligible:
        raise ClassError("; ".join(prof.reasons["greedy"]))
    t0 = time.perf_counter()
    cat, net = problem.catalog, problem.model.tcp
    attr = cat.schema.attributes[0].name
    touches = 0

    def satisfiers(value):
        nonlocal touches
        out = []
        for i, it in enumerate(cat.items):
            touches += 1
            if it.values[attr] == value:
                out.append(i)
        return out

    allowed: dict = {}  # attribute value -> allowed counts so far
    assignment: dict = {}
    for pid in topo_property_order(net):
        p = problem.by_id[pid]
        x = p.phi.value
        avail = len(satisfiers(x))
        current = allowed.get(x, set(range(avail + 1)))
        options = preferred_value_order(net, pid, assignment, problem.n)
        for v in options:
            left = current & _allowed(p, v, avail)
            if left:
                assignment[pid] = v
                allowed[x] = left
                break
        else:
            raise ClassError(f"no value of {pid} is consistent with the earlier choices")
    subset = []
    for x, counts in allowed.items():
        subset += satisfiers(x)[: min(counts)]
    stats = {"item_touches": touches, "wall_ms": (time.perf_counter() - t0) * 1000.0}
    return SearchResult(frozenset(subset), problem.assignment_of_mask(_mask(subset)),
                        problem.value_of_mask(_mask(subset)), stats=stats, engine="greedy")


def _mask(indices) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


# ---------------------------------------------------------------------------
# 2-SAT


@dataclass
class TwoSatInstance:
    num_vars: int
    clauses: list = field(default_factory=list)  # tuples of literals: +v+1 true, -(v+1) false

    def satisfied_by(self, values) -> bool:
        return all(any(values[abs(l) - 1] == (l > 0) for l in c) for c in self.clauses)


class Infeasible(ValueError):
    """The property value has no clause form because no count is allowed."""


def clauses_for(items: list, counts: set) -> list:
    """Clauses over the (at most two) satisfier items that allow exactly ``counts`` selected."""
    lits = [i + 1 for i in items]
    full = set(range(len(items) + 1))
    counts = counts & full
    if not counts:
        raise Infeasible("no allowed count")
    if counts == full:
        return []
    if len(items) == 1:
        (a,) = lits
        return [(a,)] if counts == {1} else [(-a,)]
    a, b = lits
    table = {
        frozenset({1, 2}): [(a, b)],
        frozenset({2}): [(a,), (b,)],
        frozenset({1}): [(a, b), (-a, -b)],
        frozenset({0}): [(-a,), (-b,)],
        frozenset({0, 1}): [(-a, -b)],
        frozenset({0, 2}): [(a, -b), (-a, b)],
    }
    return table[frozenset(counts)]


def translate_to_2sat(props_with_values, problem: Problem) -> TwoSatInstance:
    """One variable per item; each (property, value) pair becomes zero to two clauses."""
    cat = problem.catalog
    inst = TwoSatInstance(len(cat))
    bad = []
    for p, v in props_with_values:
        items = cat.satisfiers(p.phi)
        if len(items) > 2:
            raise ClassError(f"{p.id} matches {len(items)} items; the clause forms need at most 2")
        try:
            inst.clauses += clauses_for(items, _allowed(p, v, len(items)))
        except Infeasible:
            bad.append(f"{p.id}={v}")
    if bad:
        raise Infeasible("infeasible property values: " + ", ".join(bad))
    return inst


def solve_2sat(inst: TwoSatInstance):
    """Satisfying assignment (list of bools) or None, via strongly connected components."""
    n = inst.num_vars
    node = lambda lit: 2 * (abs(lit) - 1) + (0 if lit > 0 else 1)
    succ = [[] for _ in range(2 * n)]
    pred = [[] for _ in range(2 * n)]
    for c in inst.clauses:
        a, b = (c[0], c[0]) if len(c) == 1 else c
        # (a or b): not a -> b, not b -> a
        for x, y in ((-a, b), (-b, a)):
            succ[node(x)].append(node(y))
            pred[node(y)].append(node(x))
    # first pass: finishing order on the implication graph
    seen = [False] * (2 * n)
    finish = []
    for root in range(2 * n):
        if seen[root]:
            continue
        seen[root] = True
        stack = [(root, 0)]
        while stack:
            v, k = stack.pop()
            if k < len(succ[v]):
                stack.append((v, k + 1))
                w = succ[v][k]
                if not seen[w]:
                    seen[w] = True
                    stack.append((w, 0))
            else:
                finish.append(v)
    # second pass on the reversed graph: components come out in topological order
    comp = [-1] * (2 * n)
    label = 0
    for root in reversed(finish):
        if comp[root] != -1:
            continue
        comp[root] = label
        stack = [root]
        while stack:
            v = stack.pop()
            for w in pred[v]:
                if comp[w] == -1:
                    comp[w] = label
                    stack.append(w)
        label += 1
    values = []
    for v in range(n):
        t, f = comp[2 * v], comp[2 * v + 1]
        if t == f:
            return None
        values.append(t > f)
    return values


def solve_onevee(problem: Problem) -> SearchResult:
    """Settle properties in preference order, keeping the committed values jointly 2-satisfiable."""
    prof = check_class(problem)
    if not prof.twosat_eligible:
        raise ClassError("; ".join(prof.reasons["twosat"]))
    t0 = time.perf_counter()
    net = problem.model.tcp
    committed: list = []
    assignment: dict = {}
    values = [False] * problem.n
    checks = 0
    for pid in topo_property_order(net):
        p = problem.by_id[pid]
        for v in preferred_value_order(net, pid, assignment, problem.n):
            checks += 1
            try:
                got = solve_2sat(translate_to_2sat(committed + [(p, v)], problem))
            except Infeasible:
                got = None
            if got is not None:
                committed.append((p, v))
                assignment[pid] = v
                values = got
                break
        else:
            raise ClassError(f"no value of {pid} is consistent with the earlier choices")
    subset = [i for i, on in enumerate(values) if on]
    m = _mask(subset)
    stats = {"twosat_checks": checks, "wall_ms": (time.perf_counter() - t0) * 1000.0}
    return SearchResult(frozenset(subset), problem.assignment_of_mask(m), problem.value_of_mask(m),
                        stats=stats, engine="twosat")
