import itertools
import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prefset.csp_core import (
    CardinalityConstraint, CSPInstance, NoGoodStore, PairState, SearchTimeout, Solution, SolverConfig,
    brute_force_solutions, can_must_check, forward_check, monotonic_prune, solve, static_order,
)

RELS = ["=", "!=", "<", "<=", ">", ">="]


@st.composite
def csps(draw, max_vars=9):
    n = draw(st.integers(0, max_vars))
    cons = []
    for j in range(draw(st.integers(1, 5))):
        scope = draw(st.sets(st.integers(0, max(0, n - 1)), max_size=n)) if n else set()
        signed = draw(st.booleans()) and draw(st.booleans())
        coefs = {i: (draw(st.sampled_from([1, -1])) if signed else 1) for i in scope}
        cons.append(CardinalityConstraint(f"c{j}", coefs, draw(st.sampled_from(RELS)), draw(st.integers(-1, 5))))
    order = draw(st.permutations(range(n)))
    return CSPInstance(n, cons, tuple(order))


def first_in_preorder(csp):
    """Set-enumeration pre-order = lexicographic order of the sorted variable positions."""
    pos = {v: p for p, v in enumerate(csp.var_order)}
    sols = brute_force_solutions(csp)
    return min(sols, key=lambda s: tuple(sorted(pos[i] for i in s)), default=None)


CONFIGS = [SolverConfig(fc=a, monotonic=b, can_must=c, nogoods=d) for a, b, c, d in itertools.product([True, False], repeat=4)]


@settings(max_examples=300, deadline=None)
@given(csps())
def test_first_solution_matches_enumeration(csp):
    want = first_in_preorder(csp)
    for cfg in CONFIGS:
        got, _ = solve(csp, cfg)
        assert (None if got is None else got.items) == want


@settings(max_examples=150, deadline=None)
@given(csps(), st.data())
def test_warm_start_from_relaxation(csp, data):
    """Solving from the first solution of a relaxation gives the cold answer."""
    keep = data.draw(st.integers(0, len(csp.constraints)))
    relaxed = CSPInstance(csp.num_vars, csp.constraints[:keep], csp.var_order)
    start, _ = solve(relaxed)
    if start is None:
        return
    warm, _ = solve(csp, SolverConfig(nogoods=True), warm_start=start)
    cold, _ = solve(csp)
    assert warm == cold


def test_senators_first_solutions():
    card = CardinalityConstraint("C", {i: 1 for i in range(4)}, "=", 3)
    c1 = CardinalityConstraint("P1", {0: 1, 1: 1, 2: 1}, ">=", 2)
    c3 = CardinalityConstraint("P3", {3: 1}, ">=", 1)
    s1, _ = solve(CSPInstance(4, [card, c1]))
    assert s1.bits(4) == (1, 1, 1, 0)
    s2, st_ = solve(CSPInstance(4, [card, c1, c3]), warm_start=s1)
    assert s2.bits(4) == (1, 1, 0, 1)


def test_unsat_and_trivial():
    assert solve(CSPInstance(3, [CardinalityConstraint("x", {0: 1, 1: 1}, ">=", 3)]))[0] is None
    sol, _ = solve(CSPInstance(0, []))
    assert sol == Solution(frozenset(), ())


def test_node_limit_and_deadline():
    n = 22
    cons = [CardinalityConstraint("a", {i: 1 for i in range(n)}, "=", 11),
            CardinalityConstraint("b", {i: 1 for i in range(0, n, 2)}, "=", 0),
            CardinalityConstraint("c", {i: 1 for i in range(1, n, 2)}, "<=", 10)]
    with pytest.raises(SearchTimeout):
        solve(CSPInstance(n, cons), SolverConfig(fc=False, monotonic=False, can_must=False, node_limit=2000))
    with pytest.raises(SearchTimeout):
        solve(CSPInstance(n, cons), SolverConfig(fc=False, monotonic=False, can_must=False,
                                                deadline=time.monotonic() - 1))
    assert solve(CSPInstance(n, cons))[0] is None  # pruning proves it at once


def test_single_constraint_rules():
    le2 = CardinalityConstraint("le", {0: 1, 1: 1, 2: 1}, "<=", 2)
    ge2 = CardinalityConstraint("ge", {0: 1, 1: 1, 2: 1}, ">=", 2)
    signed = CardinalityConstraint("s", {0: 1, 1: -1}, "<=", 0)
    assert monotonic_prune(le2, 3) and not monotonic_prune(le2, 2)
    assert not monotonic_prune(signed, 5)
    assert forward_check(ge2, 0, 2) and not forward_check(ge2, 0, 1)
    need = CardinalityConstraint("n", {0: 1, 1: 1}, ">=", 2)
    cap = CardinalityConstraint("c", {0: 1, 1: 1, 2: 1}, "<=", 1)
    assert can_must_check(need, cap, PairState(0, 0, 2, 3, 0))
    assert not can_must_check(need, cap, PairState(0, 0, 2, 3, 1))


def test_nogood_store():
    root = NoGoodStore()
    root.record((1, 0), 5)
    root.record((1, 0), 3)
    assert root.table[(1, 0)] == 3
    kid = root.child()
    assert kid.match((1, 0), 4) and not kid.match((1, 0), 2)
    kid.record((0, 0), 1)
    assert not root.match((0, 0), 9)
    small = NoGoodStore(cap=2)
    for d, v in enumerate([(1,), (2,), (3,)]):
        small.record(v, d)
    assert len(small) == 2 and (1,) not in small.table


def test_static_order_prefers_constrained_items():
    cons = [CardinalityConstraint("a", {2: 1, 1: 1}, ">=", 1), CardinalityConstraint("b", {2: 1}, "<=", 0)]
    assert static_order(CSPInstance(3, cons)) == (2, 1, 0)
    assert static_order(CSPInstance(3, cons), [0, 0, 5]) == (2, 1, 0)
    assert static_order(CSPInstance(3, []), [1, 3, 2]) == (1, 2, 0)


def test_dump_and_limits():
    c = CardinalityConstraint("P", {2: 1, 0: -1}, ">", 1)
    assert c.dump() == "P: [-0,+2] > 1"
    assert c.limits()[0] == 2
    assert CSPInstance(3, [c]).dump() == c.dump()
