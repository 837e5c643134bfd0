import random

import pytest

from prefset.csp_core import Solution
from prefset.csp_search import (
    VARIANTS, CSPSearchConfig, build_csp, sibling_inference, solve_csp_bnb, variant_config, warm_start_solve,
)
from prefset.harness.generators import boolean_tcp_profile, gen_random
from prefset.harness.oracle import brute_force_gai, brute_force_tcp


def test_senators_tree_of_csps(sen_tcp):
    res = solve_csp_bnb(sen_tcp, var_order="index", trace=True)
    steps = [(t["alpha"], t["witness"], t["backtracks"], t["how"]) for t in res.stats["trace"]]
    assert steps[1][:3] == ({"P1": True}, (1, 1, 1, 0), 0)
    assert steps[2] == ({"P1": True, "P2": True}, (1, 1, 1, 0), 0, "verified")
    assert steps[3][:2] == ({"P1": True, "P2": True, "P3": True}, (1, 1, 0, 1))
    assert res.assignment == {"P1": True, "P2": True, "P3": True}
    assert res.stats["property_backtracks"] == 0


@pytest.mark.parametrize("variant", list(VARIANTS))
def test_senators_gai_every_variant(sen_gai, variant):
    res = solve_csp_bnb(sen_gai, variant_config(variant))
    assert res.value == 11 and res.assignment == {"P1": True, "P2": True, "P3": True}


def _cases(count, seed0, **prof):
    for seed in range(seed0, seed0 + count):
        r = random.Random(seed)
        p = {"n": r.randint(3, 10), "m": r.randint(1, 5), "model": "tcp" if seed % 2 else "gai"}
        p.update(prof)
        yield seed, gen_random(p, seed).problem


def test_gai_mode_matches_oracle():
    for seed, prob in _cases(60, 2000):
        want = brute_force_gai(prob)
        for strategy in ("dfs", "bfs"):
            got = solve_csp_bnb(prob, mode="gai", strategy=strategy)
            if want.value is None:
                assert not got.proven_optimal, seed
            else:
                assert got.proven_optimal and got.value == want.value, (seed, strategy)


def test_tcp_mode_matches_oracle():
    for seed, prob in _cases(60, 3000, model="tcp"):
        want = brute_force_tcp(prob)
        for v in VARIANTS:
            got = solve_csp_bnb(prob, variant_config(v, mode="tcp"))
            if want.assignment is None:
                assert not got.proven_optimal, seed
            else:
                assert got.assignment == want.assignment, (seed, v)


def test_boolean_nets_backtrack_at_most_once_per_property():
    for seed in range(40):
        prob = gen_random(boolean_tcp_profile(8, 5), seed).problem
        res = solve_csp_bnb(prob, mode="tcp")
        assert res.stats["property_backtracks"] <= len(prob.props)


def test_build_csp_solutions_are_alpha_subsets(sen_tcp):
    csp = build_csp({"P1": True, "P3": False}, sen_tcp.catalog, sen_tcp.props, 2)
    assert [c.id for c in csp.constraints] == ["C", "P1", "!P3"]
    assert csp.is_solution({0, 1}) and not csp.is_solution({0, 3})


def test_sibling_inference_rules(sen_tcp):
    p3 = sen_tcp.by_id["P3"]
    w = Solution(frozenset({0, 1, 2}), (0, 1, 2, 3))
    assert sibling_inference(w, p3, False, True, sen_tcp.catalog) is w
    with pytest.raises(ValueError):
        sibling_inference(w, p3, True, False, sen_tcp.catalog)


def test_warm_start_helper(sen_tcp):
    csp = build_csp({"P3": True}, sen_tcp.catalog, sen_tcp.props, 3)
    assert warm_start_solve(None, csp, parent_unsat=True)[0] is None
    sol, _ = warm_start_solve(None, csp)
    assert sol.items == frozenset({0, 1, 3})


def test_infeasible_cardinality(sen_tcp):
    from prefset.harness.fixtures import senators_tcp

    res = solve_csp_bnb(senators_tcp(cardinality=5))
    assert not res.proven_optimal and "cardinality" in res.diagnostic


def test_timeout_flag():
    from prefset.harness.movies import festival_problem

    prob = festival_problem("P14''", n=3000)
    res = solve_csp_bnb(prob, CSPSearchConfig(nogoods=False, warm_start=False, sibling=False, timeout=1.0))
    assert res.timed_out and not res.proven_optimal
