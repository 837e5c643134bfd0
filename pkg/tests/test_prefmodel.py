import itertools
import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prefset.harness.generators import gen_random
from prefset.prefmodel import (
    CPRow, Factor, GAIFunction, ModelError, TCPNet, gai_model, gai_value, load_model,
    model_to_json, preferred_value_order, tcp_model, topo_property_order, upper_bound, validate_tcpnet,
)


def test_senators_gai_values(sen_gai):
    g = sen_gai.model.gai
    assert gai_value(g, {"P1": True, "P2": True, "P3": True}) == 11
    assert gai_value(g, {"P1": False, "P2": False, "P3": False}) == 5
    with pytest.raises(ModelError, match="partial"):
        gai_value(g, {"P1": True})


def test_senators_net_orders(sen_tcp):
    net = sen_tcp.model.tcp
    assert topo_property_order(net) == ["P1", "P2", "P3"]
    assert preferred_value_order(net, "P2", {"P1": False}) == [False, True]
    with pytest.raises(ModelError, match="parent"):
        preferred_value_order(net, "P2", {})


def test_validation_messages(sen_tcp):
    props = sen_tcp.by_id
    base = sen_tcp.model.tcp
    cyc = TCPNet(base.nodes, base.cp_arcs, base.cp_tables, base.i_arcs + [("P3", "P1")])
    assert any("cycle" in e for e in validate_tcpnet(cyc, props, 4))
    missing = TCPNet(base.nodes, base.cp_arcs, {k: v for k, v in base.cp_tables.items() if k != "P3"}, base.i_arcs)
    assert validate_tcpnet(missing, props, 4) == ["missing CP table for P3"]
    partial = dict(base.cp_tables, P2=[CPRow({"P1": True}, (True, False))])
    errs = validate_tcpnet(TCPNet(base.nodes, base.cp_arcs, partial, base.i_arcs), props, 4)
    assert errs and "misses context" in errs[0]
    ci = TCPNet(base.nodes, base.cp_arcs, base.cp_tables, base.i_arcs, ci_arcs=[("P1", "P2", "P3")])
    assert any("conditional importance" in e for e in validate_tcpnet(ci, props, 4))
    assert validate_tcpnet(base, props, 4) == []


def test_gai_tables_must_be_total(sen_gai):
    with pytest.raises(ModelError, match="not total"):
        gai_model(sen_gai.props, 4, [(("P1",), {(True,): 1}), (("P2", "P3"), {(True, True): 0})])


def _descendants(net, v):
    succ = {}
    for a, b in net.edges():
        succ.setdefault(a, []).append(b)
    out, stack = set(), [v]
    while stack:
        for w in succ.get(stack.pop(), []):
            if w not in out:
                out.add(w)
                stack.append(w)
    return out


@pytest.mark.parametrize("seed", range(40))
def test_compiled_value_respects_every_improving_flip(seed):
    """A better value at a node outweighs any change below it, with everything else fixed."""
    inst = gen_random({"n": 2, "m": 4, "counters": 0.3, "model": "tcp"}, seed).problem
    net, g, n = inst.model.tcp, inst.model.gai, inst.n
    ids = [p.id for p in inst.props]
    doms = [inst.by_id[p].domain(n) for p in ids]
    for combo in itertools.product(*doms):
        a = dict(zip(ids, combo))
        for v in ids:
            prefs = preferred_value_order(net, v, a, n)
            below = sorted(_descendants(net, v))
            rank = prefs.index(a[v])
            for worse in prefs[rank + 1:]:
                for tail in itertools.product(*[inst.by_id[q].domain(n) for q in below]):
                    b = dict(a)
                    b[v] = worse
                    b.update(zip(below, tail))
                    assert gai_value(g, a) > gai_value(g, b)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10_000))
def test_upper_bound_is_admissible(seed):
    inst = gen_random({"n": 3, "m": 3, "model": "gai"}, seed).problem
    g, n = inst.model.gai, inst.n
    rng = random.Random(seed)
    reach = {}
    for p in inst.props:
        dom = list(p.domain(n))
        reach[p.id] = set(rng.sample(dom, rng.randint(1, len(dom))))
    ub = upper_bound(g, reach)
    best = max(gai_value(g, dict(zip(reach, c))) for c in itertools.product(*reach.values()))
    assert ub >= best
    single = {k: {next(iter(v))} for k, v in reach.items()}
    assert upper_bound(g, single) == gai_value(g, {k: next(iter(v)) for k, v in single.items()})


@pytest.mark.parametrize("kind", ["tcp", "gai"])
def test_json_roundtrip(kind):
    inst = gen_random({"n": 4, "m": 4, "model": kind, "cardinality": 1.0}, 3).problem
    text = json.dumps(model_to_json(inst.model))
    back = load_model(text, inst.props, inst.n)
    assert back.kind == kind
    assert back.cardinality == inst.model.cardinality
    assert [f.table for f in back.gai.factors] == [f.table for f in inst.model.gai.factors]


def test_compile_weights_on_chain():
    from prefset.catalog import TRUE
    from prefset.properties import count_vs_const

    props = [count_vs_const(x, TRUE, ">=", 1) for x in "ABC"]
    m = tcp_model(props, 2, i_arcs=[("A", "B"), ("B", "C")])
    tables = {f.scope[-1]: f.table for f in m.gai.factors}
    assert tables["C"] == {(True,): 1, (False,): 0}
    assert tables["B"] == {(True,): 2, (False,): 0}
    assert tables["A"] == {(True,): 4, (False,): 0}


def test_factor_helpers():
    f = Factor(("A",), {(True,): 3, (False,): -1})
    assert f.span() == 4
    assert GAIFunction([f]).scaled(2).factors[0].table == {(True,): 6, (False,): -2}
