"""Instance generators: hardness reductions and seeded random instances."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..catalog import TRUE, And, Atom, Catalog, Item, Not, Or, make_schema
from ..prefmodel import gai_model, tcp_model
from ..problem import Problem
from ..properties import count_vs_const, count_vs_count, counter


@dataclass
class GeneratedInstance:
    problem: Problem
    provenance: dict = field(default_factory=dict)


def _any_of(attr: str, values) -> object:
    f = None
    for v in values:
        atom = Atom(attr, "=", v)
        f = atom if f is None else Or(f, atom)
    return f


# ---------------------------------------------------------------------------
# vertex cover


def gen_vertex_cover(vertices, edges) -> GeneratedInstance:
    """Items are vertices; an edge property holds iff the set covers that edge; SUM counts the set."""
    vertices = list(vertices)
    edges = [tuple(e) for e in edges]
    names = [f"X{j}" for j in range(len(edges))]
    schema = make_schema([(nm, (0, 1)) for nm in names])
    items = []
    for v in vertices:
        items.append(Item(f"v{v}", {nm: int(v in e) for nm, e in zip(names, edges)}))
    cat = Catalog(schema, items)
    props = [count_vs_const(f"P{j}", Atom(nm, "=", 1), ">", 0) for j, nm in enumerate(names)]
    props.append(counter("SUM", TRUE))
    tables = {p.id: (True, False) for p in props[:-1]}
    tables["SUM"] = "asc"
    model = tcp_model(props, len(cat), cp_tables=tables, i_arcs=[(p.id, "SUM") for p in props[:-1]])
    return GeneratedInstance(Problem(cat, props, model), {"vertex_cover": {"vertices": vertices, "edges": edges}})


def min_vertex_cover(vertices, edges) -> int:
    """Reference answer by enumerating vertex subsets by size."""
    from itertools import combinations

    vertices = list(vertices)
    for s in range(len(vertices) + 1):
        for cover in combinations(vertices, s):
            cs = set(cover)
            if all(u in cs or v in cs for u, v in edges):
                return s
    return len(vertices)


# ---------------------------------------------------------------------------
# CNF reductions; clauses are lists of non-zero ints (negative = negated variable)


def _lit_name(lit: int) -> str:
    return f"x{lit}" if lit > 0 else f"~x{-lit}"


def _cnf_parts(clauses, num_vars):
    lits = []
    for v in range(1, num_vars + 1):
        lits += [_lit_name(v), _lit_name(-v)]
    schema = make_schema([("X", lits)])
    cat = Catalog(schema, [Item(f"o_{name}", {"X": name}) for name in lits])
    props = [count_vs_const(f"V{v}", _any_of("X", [_lit_name(v), _lit_name(-v)]), "=", 1)
             for v in range(1, num_vars + 1)]
    for j, clause in enumerate(clauses):
        names = list(dict.fromkeys(_lit_name(l) for l in clause))
        props.append(count_vs_const(f"C{j}", _any_of("X", names), ">=", 1))
    return cat, props


def gen_ksat(clauses, num_vars: int) -> GeneratedInstance:
    """All properties true at once iff the CNF is satisfiable; edgeless net, true preferred."""
    cat, props = _cnf_parts(clauses, num_vars)
    model = tcp_model(props, len(cat), cp_tables={p.id: (True, False) for p in props})
    return GeneratedInstance(Problem(cat, props, model), {"ksat": {"clauses": [list(c) for c in clauses],
                                                                   "num_vars": num_vars}})


def gen_max2sat(clauses, num_vars: int) -> GeneratedInstance:
    """Clause properties score 1 when true; a broken variable property costs twice the clause count."""
    if any(len(c) > 2 for c in clauses):
        raise ValueError("MAX-2SAT clauses have at most two literals")
    cat, props = _cnf_parts(clauses, num_vars)
    m = len(clauses)
    factors = []
    for p in props:
        if p.id.startswith("V"):
            factors.append(((p.id,), {(True,): 0, (False,): -2 * m}))
        else:
            factors.append(((p.id,), {(True,): 1, (False,): 0}))
    model = gai_model(props, len(cat), factors)
    return GeneratedInstance(Problem(cat, props, model), {"max2sat": {"clauses": [list(c) for c in clauses],
                                                                      "num_vars": num_vars}})


def random_cnf(rng: random.Random, num_vars: int, num_clauses: int, width: int) -> list:
    out = []
    for _ in range(num_clauses):
        vs = rng.sample(range(1, num_vars + 1), min(width, num_vars))
        out.append([v if rng.random() < 0.5 else -v for v in vs])
    return out


def cnf_satisfiable(clauses, num_vars: int) -> bool:
    return max_sat(clauses, num_vars) == len(clauses)


def max_sat(clauses, num_vars: int) -> int:
    """Most clauses any assignment satisfies (plain enumeration)."""
    best = 0
    for bits in range(1 << num_vars):
        sat = sum(1 for c in clauses if any(((bits >> (abs(l) - 1)) & 1) == (l > 0) for l in c))
        best = max(best, sat)
    return best


# ---------------------------------------------------------------------------
# random instances

DEFAULT_PROFILE = {
    "n": 10, "m": 4, "a": 2, "d": 3, "k": 1,
    "model": "tcp",  # "tcp" | "gai"
    "counters": 0.2,  # share of counter properties
    "count_vs_count": 0.15,
    "cardinality": 0.3,  # probability that a hard size is set
    "integer_attr": True,
}


def _random_formula(rng: random.Random, schema, connectives: int):
    attrs = schema.attributes

    def atom():
        at = rng.choice(attrs)
        if at.kind == "integer":
            lo = at.lo + 1 if at.hi > at.lo else at.lo
            return Atom(at.name, rng.choice(["=", "!=", "<=", ">=", "<", ">"]), rng.randint(lo, at.hi))
        return Atom(at.name, rng.choice(["=", "=", "!="]), rng.choice(at.domain))

    f = atom()
    for _ in range(connectives):
        r = rng.random()
        if r < 0.15:
            f = Not(f)
        elif r < 0.55:
            f = And(f, atom()) if rng.random() < 0.5 else And(atom(), f)
        else:
            f = Or(f, atom()) if rng.random() < 0.5 else Or(atom(), f)
    return f


def gen_random(profile: dict | None = None, seed: int = 0) -> GeneratedInstance:
    prof = dict(DEFAULT_PROFILE)
    prof.update(profile or {})
    rng = random.Random(seed)
    n, m, a, d, kmax = prof["n"], prof["m"], prof["a"], prof["d"], prof["k"]
    spec = []
    for j in range(a):
        if prof["integer_attr"] and j == a - 1 and a > 1:
            spec.append((f"A{j}", (0, d - 1)))
        else:
            spec.append((f"A{j}", [f"v{t}" for t in range(d)]))
    schema = make_schema(spec)
    items = [Item(f"o{i}", {at.name: (rng.randint(at.lo, at.hi) if at.kind == "integer" else rng.choice(at.domain))
                            for at in schema.attributes}) for i in range(n)]
    cat = Catalog(schema, items)
    props = []
    for j in range(m):
        pid = f"P{j}"
        phi = _random_formula(rng, schema, rng.randint(0, kmax))
        r = rng.random()
        if r < prof["counters"]:
            props.append(counter(pid, phi if rng.random() < 0.7 else TRUE))
        elif r < prof["counters"] + prof["count_vs_count"]:
            psi = _random_formula(rng, schema, rng.randint(0, kmax))
            props.append(count_vs_count(pid, phi, rng.choice(["=", "!=", "<", "<=", ">", ">="]), psi))
        else:
            rel = rng.choice([">=", ">=", "<=", "=", ">", "<", "!="])
            props.append(count_vs_const(pid, phi, rel, rng.randint(1, max(1, n // 3))))
    card = rng.randint(0, n) if rng.random() < prof["cardinality"] else None
    if prof["model"] == "tcp":
        model = _random_tcp(rng, props, n, card)
    else:
        model = _random_gai(rng, props, n, card)
    return GeneratedInstance(Problem(cat, props, model), {"random": {"seed": seed, "profile": prof}})


def _random_order(rng, p, n):
    if p.is_boolean:
        return (True, False) if rng.random() < 0.7 else (False, True)
    r = rng.random()
    if r < 0.4:
        return "asc"
    if r < 0.8:
        return "desc"
    vals = list(range(n + 1))
    rng.shuffle(vals)
    return tuple(vals)


def _random_tcp(rng, props, n, card):
    from itertools import product

    ids = [p.id for p in props]
    topo = ids[:]
    rng.shuffle(topo)
    cp_arcs, i_arcs, tables = [], [], {}
    for j, pid in enumerate(topo):
        p = next(q for q in props if q.id == pid)
        earlier = topo[:j]
        parents = [q for q in earlier if rng.random() < 0.35][:2]
        # keep contexts small: at most one counter parent
        doms = []
        kept = []
        for q in parents:
            qp = next(x for x in props if x.id == q)
            if not qp.is_boolean and any(not next(x for x in props if x.id == r).is_boolean for r in kept):
                continue
            kept.append(q)
            doms.append(qp.domain(n))
        if not kept:
            tables[pid] = _random_order(rng, p, n)
        else:
            rows = []
            for combo in product(*doms):
                order = _random_order(rng, p, n)
                if isinstance(order, str):
                    order = tuple(sorted(range(n + 1), reverse=(order == "desc")))
                rows.append((dict(zip(kept, combo)), order))
            tables[pid] = rows
        cp_arcs += [(q, pid) for q in kept]
        i_arcs += [(q, pid) for q in earlier if q not in kept and rng.random() < 0.2]
    return tcp_model(props, n, cp_arcs=cp_arcs, cp_tables=tables, i_arcs=i_arcs, cardinality=card)


def _random_gai(rng, props, n, card):
    from itertools import product

    factors = []
    ids = [p.id for p in props]
    by_id = {p.id: p for p in props}
    uncovered = set(ids)
    while uncovered or len(factors) < len(ids) // 2 + 1:
        first = rng.choice(sorted(uncovered)) if uncovered else rng.choice(ids)
        scope = [first]
        if len(ids) > 1 and rng.random() < 0.5:
            scope.append(rng.choice([q for q in ids if q != first]))
        doms = [by_id[q].domain(n) for q in scope]
        table = {combo: rng.randint(-5, 10) for combo in product(*doms)}
        factors.append((tuple(scope), table))
        uncovered -= set(scope)
    return gai_model(props, n, factors, cardinality=card)


def boolean_tcp_profile(n: int, m: int) -> dict:
    return {"n": n, "m": m, "counters": 0.0, "count_vs_count": 0.15, "model": "tcp"}


# ---------------------------------------------------------------------------
# instances inside the two tractable classes


def gen_atomic(n: int, m: int, seed: int = 0, d: int = 4) -> GeneratedInstance:
    """One categorical attribute; every property counts a single value."""
    rng = random.Random(seed)
    values = [f"x{t}" for t in range(d)]
    cat = Catalog(make_schema([("X", values)]), [Item(f"o{i}", {"X": rng.choice(values)}) for i in range(n)])
    props = [count_vs_const(f"P{j}", Atom("X", "=", rng.choice(values)),
                            rng.choice(["=", "!=", "<", "<=", ">", ">="]), rng.randint(0, 4)) for j in range(m)]
    model = _random_tcp(rng, props, n, None)
    return GeneratedInstance(Problem(cat, props, model), {"random": {"seed": seed, "class": "atomic"}})


def gen_onevee(n: int, m: int, seed: int = 0) -> GeneratedInstance:
    """One attribute whose values are unique per item; formulas are one value or a two-value disjunction."""
    rng = random.Random(seed)
    values = [f"x{t}" for t in range(n)]
    cat = Catalog(make_schema([("X", values)]), [Item(f"o{i}", {"X": values[i]}) for i in range(n)])
    props = []
    for j in range(m):
        if n >= 2 and rng.random() < 0.6:
            a, b = rng.sample(values, 2)
            phi = Or(Atom("X", "=", a), Atom("X", "=", b))
        else:
            phi = Atom("X", "=", rng.choice(values))
        props.append(count_vs_const(f"P{j}", phi, rng.choice(["=", "!=", "<", "<=", ">", ">="]), rng.randint(0, 3)))
    model = _random_tcp(rng, props, n, None)
    return GeneratedInstance(Problem(cat, props, model), {"random": {"seed": seed, "class": "onevee"}})
