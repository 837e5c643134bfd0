import json
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prefset.catalog import Catalog, Item, make_schema, parse_formula
from prefset.properties import (
    allowed_counts, count_vs_const, count_vs_count, counter, dump_properties, eval_all, eval_on_mask,
    eval_property, load_properties, property_to_constraints, reachable_from_masks, reachable_values,
    resolve_offline_conflicts,
)

SCHEMA = make_schema([("Color", ["red", "green", "blue"]), ("Size", (0, 3))])
RED = parse_formula("Color = red", SCHEMA)
BIG = parse_formula("Size >= 2", SCHEMA)


def _subsets(indices):
    for r in range(len(indices) + 1):
        yield from combinations(indices, r)


def test_senators_values(senators):
    from prefset.harness.fixtures import senators_properties

    props = senators_properties(senators)
    a = eval_all(props, senators, [0, 1, 3])
    assert a == {"P1": True, "P2": True, "P3": True}
    assert eval_all(props, senators, []) == {"P1": False, "P2": False, "P3": False}
    assert eval_property(props[0], [senators.items[0]]) is False


def test_kinds_and_domains():
    p = count_vs_count("Q", RED, ">", BIG)
    c = counter("N", RED)
    assert p.is_boolean and not c.is_boolean
    assert c.domain(3) == (0, 1, 2, 3)
    assert p.describe() == "<|Color = red| > |Size >= 2|>"
    with pytest.raises(ValueError):
        count_vs_const("bad", RED, ">=", -1)


def test_allowed_counts():
    assert allowed_counts(">=", 2, 4) == {2, 3, 4}
    assert allowed_counts("!=", 1, 3) == {0, 2, 3}
    assert allowed_counts("<", 0, 3) == set()


def test_offline_conflicts():
    props = [count_vs_const("A", RED, ">=", 2), count_vs_const("B", RED, ">=", 3),
             count_vs_const("C", RED, "<=", 1), count_vs_const("D", BIG, "<=", 1)]
    rep = resolve_offline_conflicts(props)
    pairs = {(e.first, e.second): e for e in rep.entries}
    assert pairs[("A", "B")].kind == "subsumption" and pairs[("A", "B")].redundant == "A"
    assert pairs[("A", "C")].kind == "exclusive" and pairs[("A", "C")].forced == ("C", False)
    assert ("A", "D") not in pairs


def test_json_roundtrip():
    props = [count_vs_const("A", RED, ">", 1), count_vs_count("B", RED, "!=", BIG), counter("C", BIG)]
    back = load_properties(dump_properties(props), SCHEMA)
    assert back == props
    with pytest.raises(ValueError, match="duplicate"):
        load_properties(json.dumps([props[0].to_json()] * 2), SCHEMA)


rows = st.lists(st.tuples(st.sampled_from(["red", "green", "blue"]), st.integers(0, 3)), min_size=0, max_size=7)
props_st = st.one_of(
    st.builds(lambda f, r, k: count_vs_const("P", f, r, k), st.sampled_from([RED, BIG]),
              st.sampled_from(["=", "!=", "<", "<=", ">", ">="]), st.integers(0, 4)),
    st.builds(lambda r: count_vs_count("P", RED, r, BIG), st.sampled_from(["=", "!=", "<", "<=", ">", ">="])),
    st.builds(lambda f: counter("P", f), st.sampled_from([RED, BIG])),
)


def _catalog(data):
    return Catalog(SCHEMA, [Item(f"o{i}", {"Color": c, "Size": s}) for i, (c, s) in enumerate(data)])


@settings(max_examples=300, deadline=None)
@given(rows, props_st, st.data())
def test_reachable_values_match_enumeration(data, p, draw):
    cat = _catalog(data)
    n = len(cat)
    current = draw.draw(st.sets(st.integers(0, max(0, n - 1)), max_size=n)) if n else set()
    rest = [i for i in range(n) if i not in current]
    add = draw.draw(st.one_of(st.none(), st.integers(0, len(rest) + 1)))
    expected = set()
    for extra in _subsets(rest):
        if add is None or len(extra) == add:
            expected.add(eval_property(p, [cat.items[i] for i in set(current) | set(extra)]))
    got = reachable_values(p, [cat.items[i] for i in current], [cat.items[i] for i in rest], add)
    assert got == expected
    cur_mask = sum(1 << i for i in current)
    rem_mask = sum(1 << i for i in rest)
    assert reachable_from_masks(p, cat, cur_mask, rem_mask, add) == expected


@settings(max_examples=300, deadline=None)
@given(rows, props_st)
def test_constraints_hold_exactly_when_property_takes_value(data, p):
    cat = _catalog(data)
    n = len(cat)
    for v in p.domain(n):
        cons = property_to_constraints(p, v, cat)
        for sub in _subsets(list(range(n))):
            mask = sum(1 << i for i in sub)
            assert all(c.satisfied_by(sub) for c in cons) == (eval_on_mask(p, cat, mask) == v)
