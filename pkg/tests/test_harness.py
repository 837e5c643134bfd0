import json

import pytest

from prefset.catalog import Catalog, Item, make_schema, parse_formula
from prefset.harness.bench import TIMEOUT_MARK, run_benchmark
from prefset.harness.fixtures import senators_gai, senators_tcp
from prefset.harness.generators import (
    cnf_satisfiable, gen_ksat, gen_max2sat, gen_random, gen_vertex_cover, max_sat, min_vertex_cover,
)
from prefset.harness.movies import festival_problem, suite_properties
from prefset.harness.oracle import GuardExceeded, brute_force_gai, brute_force_tcp
from prefset.prefmodel import gai_model, model_to_json, tcp_model
from prefset.problem import Problem
from prefset.properties import count_vs_const, dump_properties


def test_oracle_on_senators():
    g = brute_force_gai(senators_gai())
    assert g.value == 11 and g.witness == frozenset({0, 1, 3})
    # {o1,o2,o4}, {o1,o3,o4}, {o2,o3,o4} all carry (T,T,T)
    assert g.optimal_count == 3
    t = brute_force_tcp(senators_tcp())
    assert t.assignment == {"P1": True, "P2": True, "P3": True} and t.witness == frozenset({0, 1, 3})


def test_oracle_empty_properties():
    cat = Catalog(make_schema([("X", ["a"])]), [Item(f"o{i}", {"X": "a"}) for i in range(4)])
    res = brute_force_gai(Problem(cat, [], gai_model([], 4, [])))
    assert res.value == 0 and res.optimal_count == 16


def test_oracle_unsatisfiable_true_value():
    schema = make_schema([("X", ["a", "b"])])
    cat = Catalog(schema, [Item("o0", {"X": "b"})])
    props = [count_vs_const("P", parse_formula("X = a", schema), ">=", 1)]
    res = brute_force_tcp(Problem(cat, props, tcp_model(props, 1)))
    assert res.assignment == {"P": False}


def test_oracle_guard():
    with pytest.raises(GuardExceeded):
        brute_force_gai(festival_problem("P5", n=21))


@pytest.mark.parametrize("edges, cover", [([(0, 1), (1, 2), (0, 2)], 2), ([(0, 1)], 1), ([(0, 1), (1, 2)], 1)])
def test_vertex_cover_instances(edges, cover):
    verts = sorted({v for e in edges for v in e})
    assert min_vertex_cover(verts, edges) == cover
    inst = gen_vertex_cover(verts, edges).problem
    assert len(inst.catalog.schema.attributes) == len(edges)
    res = brute_force_tcp(inst)
    assert res.assignment["SUM"] == cover
    assert all(v for k, v in res.assignment.items() if k != "SUM")


def test_ksat_worked_formula():
    # (x | !y | z) & (y) & (!x | z)
    clauses = [[1, -2, 3], [2], [-1, 3]]
    inst = gen_ksat(clauses, 3).problem
    assert inst.n == 6 and len(inst.props) == 6
    assert cnf_satisfiable(clauses, 3)
    assert all(brute_force_tcp(inst).assignment.values())
    contra = gen_ksat([[1], [-1]], 1).problem
    assert not all(brute_force_tcp(contra).assignment.values())


@pytest.mark.parametrize("clauses, best", [([[1, 2]], 1), ([[1, 2], [-1, 2], [-1, -2]], 3), ([[1], [-1]], 1)])
def test_max2sat_value_is_max_satisfied(clauses, best):
    nv = max(abs(x) for c in clauses for x in c)
    assert max_sat(clauses, nv) == best
    assert brute_force_gai(gen_max2sat(clauses, nv).problem).value == best
    with pytest.raises(ValueError):
        gen_max2sat([[1, 2, 3]], 3)


def _dump(prob):
    return (json.dumps(prob.catalog.to_json()), dump_properties(prob.props),
            json.dumps(model_to_json(prob.model), default=str))


def test_random_generation_is_seeded():
    for kind in ("tcp", "gai"):
        a = gen_random({"n": 12, "m": 5, "model": kind}, 42).problem
        b = gen_random({"n": 12, "m": 5, "model": kind}, 42).problem
        assert _dump(a) == _dump(b)
        assert _dump(a) != _dump(gen_random({"n": 12, "m": 5, "model": kind}, 43).problem)


def test_festival_suites():
    cat = festival_problem("P5", n=50).catalog
    assert [p.id for p in suite_properties("P9", cat.schema)] == [f"SP{i}" for i in range(1, 10)]
    altered = {p.id: p for p in suite_properties("P14''", cat.schema)}
    assert (altered["SP14"].rel, altered["SP14"].k) == (">=", 5)
    prob = festival_problem("P14", n=200)
    assert prob.cardinality == 5 and len(prob.props) == 14


def test_bench_senators_all_variants_agree():
    rep = run_benchmark([("gai", senators_gai()), ("tcp", senators_tcp())], budget=10)
    assert rep.consistent
    assert {r.value for r in rep.rows if r.instance == "gai"} == {11}
    assert rep.to_tsv().splitlines()[0].split("\t") == rep.HEADER
    assert json.loads(rep.to_json())["consistent"]


def test_bench_marks_timeouts():
    rep = run_benchmark([("big", festival_problem("P9", n=3000))], ["subset-dfs"], budget=0.5)
    row = rep.rows[0]
    assert row.timed_out and row.cells()[3] == TIMEOUT_MARK
    assert rep.consistent


def test_bench_flags_disagreement():
    rep = run_benchmark([("s", senators_gai())], ["subset-dfs", "BB-S"], budget=5)
    rep.rows[1].value = 0
    assert rep.mismatches() and not rep.consistent
