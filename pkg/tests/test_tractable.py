import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prefset.harness.generators import gen_atomic, gen_onevee
from prefset.harness.oracle import brute_force_tcp
from prefset.properties import eval_on_mask
from prefset.tractable import (
    ClassError, Infeasible, TwoSatInstance, check_class, clauses_for, solve_2sat, solve_atomic_greedy,
    solve_onevee, translate_to_2sat,
)


def test_profiles(sen_tcp):
    prof = check_class(sen_tcp)
    assert not prof.greedy_eligible and not prof.twosat_eligible
    assert prof.a == 3 and prof.k == 1 and prof.mu == 3  # three experienced senators
    assert "a cardinality requirement is set" in prof.reasons["greedy"]
    assert check_class(gen_atomic(8, 3, 1).problem).greedy_eligible
    assert check_class(gen_onevee(8, 3, 1).problem).twosat_eligible
    with pytest.raises(ClassError):
        solve_atomic_greedy(sen_tcp)


@pytest.mark.parametrize("seed", range(50))
def test_greedy_matches_oracle(seed):
    r = random.Random(seed)
    prob = gen_atomic(r.randint(1, 12), r.randint(1, 6), seed).problem
    got = solve_atomic_greedy(prob)
    assert got.assignment == brute_force_tcp(prob).assignment


@pytest.mark.parametrize("seed", range(50))
def test_twosat_matches_oracle(seed):
    r = random.Random(seed)
    prob = gen_onevee(r.randint(2, 12), r.randint(1, 6), seed).problem
    got = solve_onevee(prob)
    assert got.assignment == brute_force_tcp(prob).assignment


@pytest.mark.parametrize("size", [1, 2])
def test_clause_table_truth_tables(size):
    """Every allowed-count set, checked on all selections of the satisfier items."""
    items = list(range(size))
    for r in range(size + 2):
        for counts in itertools.combinations(range(size + 1), r):
            counts = set(counts)
            if not counts:
                with pytest.raises(Infeasible):
                    clauses_for(items, counts)
                continue
            inst = TwoSatInstance(size, clauses_for(items, counts))
            assert all(len(c) <= 2 for c in inst.clauses)
            for bits in itertools.product([False, True], repeat=size):
                assert inst.satisfied_by(bits) == (sum(bits) in counts), (counts, bits)


@pytest.mark.parametrize("seed", range(30))
def test_translation_is_exact(seed):
    prob = gen_onevee(6, 4, seed).problem
    rng = random.Random(seed)
    chosen = [(p, rng.random() < 0.5) for p in prob.props]
    try:
        inst = translate_to_2sat(chosen, prob)
    except Infeasible:
        inst = None
    for mask in range(1 << prob.n):
        want = all(eval_on_mask(p, prob.catalog, mask) == v for p, v in chosen)
        got = inst is not None and inst.satisfied_by([bool(mask >> i & 1) for i in range(prob.n)])
        assert got == want


lits = st.integers(1, 6).flatmap(lambda v: st.sampled_from([v, -v]))


@settings(max_examples=300, deadline=None)
@given(st.lists(st.lists(lits, min_size=1, max_size=2).map(tuple), max_size=14))
def test_2sat_against_enumeration(clauses):
    inst = TwoSatInstance(6, clauses)
    got = solve_2sat(inst)
    sat = any(inst.satisfied_by(bits) for bits in itertools.product([False, True], repeat=6))
    assert (got is not None) == sat
    if got is not None:
        assert inst.satisfied_by(got)


def test_greedy_work_is_linear_in_items():
    small = solve_atomic_greedy(gen_atomic(500, 6, 7).problem).stats["item_touches"]
    big = solve_atomic_greedy(gen_atomic(1000, 6, 7).problem).stats["item_touches"]
    assert big == 2 * small
    assert small <= (6 + 4) * 500
