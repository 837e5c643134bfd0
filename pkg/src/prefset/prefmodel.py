"""Preference models over set-property values: TCP-nets and additive GAI value functions."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

from .properties import SetProperty

Value = Any  # bool for boolean properties, int for counters
Assignment = Mapping[str, Value]


class ModelError(ValueError):
    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def property_domain(p: SetProperty, n: int) -> tuple:
    return tuple(p.domain(n))


# ---------------------------------------------------------------------------
# TCP-nets


@dataclass
class CPRow:
    when: dict  # parent id -> value
    order: tuple  # best first

    def matches(self, ctx: Assignment) -> bool:
        return all(ctx.get(k) == v for k, v in self.when.items())


@dataclass
class TCPNet:
    nodes: list  # property ids, declaration order
    cp_arcs: list = field(default_factory=list)  # (parent, child)
    cp_tables: dict = field(default_factory=dict)  # child -> list[CPRow]; or a counter order keyword
    i_arcs: list = field(default_factory=list)  # (more important, less important)
    ci_arcs: list = field(default_factory=list)  # only here so validation can reject them

    def parents(self, pid: str) -> list:
        return [a for a, b in self.cp_arcs if b == pid]

    def edges(self) -> list:
        return list(self.cp_arcs) + list(self.i_arcs)


def _expand_order(spec, domain: tuple) -> tuple:
    if spec == "asc":
        return tuple(sorted(domain))
    if spec == "desc":
        return tuple(sorted(domain, reverse=True))
    return tuple(spec)


def _find_cycle(nodes, edges) -> list | None:
    succ = {v: [] for v in nodes}
    for a, b in edges:
        if a in succ and b in succ:
            succ[a].append(b)
    color = {v: 0 for v in nodes}
    for root in nodes:
        if color[root]:
            continue
        path = [root]
        color[root] = 1
        stack = [iter(succ[root])]
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                color[path.pop()] = 2
                stack.pop()
            elif color[nxt] == 1:
                return path[path.index(nxt):] + [nxt]
            elif color[nxt] == 0:
                color[nxt] = 1
                path.append(nxt)
                stack.append(iter(succ[nxt]))
    return None


def validate_tcpnet(net: TCPNet, props: Mapping[str, SetProperty], n: int, max_contexts: int = 200_000) -> list:
    """All problems with the net, as a list of messages (empty when valid)."""
    errors = []
    node_set = set(net.nodes)
    if len(node_set) != len(net.nodes):
        errors.append("duplicate node ids")
    for pid in net.nodes:
        if pid not in props:
            errors.append(f"unknown property {pid!r}")
    for kind, arcs in (("cp", net.cp_arcs), ("importance", net.i_arcs)):
        for a, b in arcs:
            for x in (a, b):
                if x not in node_set:
                    errors.append(f"{kind} arc {a}->{b} references unknown node {x!r}")
            if a == b:
                errors.append(f"{kind} arc {a}->{b} is a self loop")
    if net.ci_arcs:
        errors.append("conditional importance arcs are not supported")
    cyc = _find_cycle(net.nodes, net.edges())
    if cyc:
        errors.append("cycle: " + " -> ".join(cyc))
    for child in net.cp_tables:
        if child not in node_set:
            errors.append(f"CP table for unknown node {child!r}")
    if errors:
        return errors
    for pid in net.nodes:
        p = props[pid]
        dom = property_domain(p, n)
        table = net.cp_tables.get(pid)
        if table is None:
            errors.append(f"missing CP table for {pid}")
            continue
        parents = net.parents(pid)
        if isinstance(table, (str, list)) and (isinstance(table, str) or not table or not isinstance(table[0], CPRow)):
            rows = [CPRow({}, _expand_order(table, dom))]
        else:
            rows = table
        for row in rows:
            extra = set(row.when) - set(parents)
            if extra:
                errors.append(f"CP row for {pid} conditions on non-parents {sorted(extra)}")
            order = row.order
            if sorted(map(repr, order)) != sorted(map(repr, dom)) or len(set(order)) != len(order):
                errors.append(f"CP row for {pid} {row.when} is not a total order over {list(dom)[:6]}...")
        parent_doms = [property_domain(props[q], n) for q in parents]
        total = 1
        for d in parent_doms:
            total *= len(d)
        if total > max_contexts:
            errors.append(f"too many parent contexts for {pid} ({total})")
            continue
        for combo in itertools.product(*parent_doms):
            ctx = dict(zip(parents, combo))
            if not any(r.matches(ctx) for r in rows):
                errors.append(f"CP table for {pid} misses context {ctx}")
    return errors


def topo_property_order(net: TCPNet) -> list:
    """Kahn's algorithm; among ready nodes the earliest declared goes first."""
    indeg = {v: 0 for v in net.nodes}
    succ = {v: [] for v in net.nodes}
    for a, b in net.edges():
        succ[a].append(b)
        indeg[b] += 1
    rank = {v: i for i, v in enumerate(net.nodes)}
    ready = sorted((v for v in net.nodes if indeg[v] == 0), key=rank.get)
    out = []
    while ready:
        v = ready.pop(0)
        out.append(v)
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
        ready.sort(key=rank.get)
    if len(out) != len(net.nodes):
        raise ModelError("network has a cycle")
    return out


def preferred_value_order(net: TCPNet, pid: str, ctx: Assignment, n: int | None = None, props=None) -> list:
    """Values of ``pid`` best first, given the values of its cp-parents in ``ctx``."""
    for q in net.parents(pid):
        if q not in ctx:
            raise ModelError(f"context misses parent {q} of {pid}")
    table = net.cp_tables[pid]
    if isinstance(table, str):
        if n is None:
            raise ModelError(f"order keyword for {pid} needs the catalog size")
        return list(_expand_order(table, tuple(range(n + 1))))
    for row in table:
        if row.matches(ctx):
            return list(row.order)
    raise ModelError(f"no CP row of {pid} matches {dict(ctx)}")


# ---------------------------------------------------------------------------
# GAI value functions


@dataclass
class Factor:
    scope: tuple
    table: dict  # tuple of values (scope order) -> number

    def span(self) -> float:
        vals = self.table.values()
        return max(vals) - min(vals) if self.table else 0.0

    def lookup(self, a: Assignment):
        return self.table[tuple(a[p] for p in self.scope)]


@dataclass
class GAIFunction:
    factors: list

    def scope_ids(self) -> list:
        seen = []
        for f in self.factors:
            for p in f.scope:
                if p not in seen:
                    seen.append(p)
        return seen

    def scaled(self, c: float) -> "GAIFunction":
        return GAIFunction([Factor(f.scope, {k: v * c for k, v in f.table.items()}) for f in self.factors])


def validate_gai(g: GAIFunction, props: Mapping[str, SetProperty], n: int, required: Iterable[str] = ()) -> list:
    errors = []
    covered = set()
    for fi, f in enumerate(g.factors):
        bad = [p for p in f.scope if p not in props]
        if bad:
            errors.append(f"factor {fi} references unknown properties {bad}")
            continue
        if len(set(f.scope)) != len(f.scope):
            errors.append(f"factor {fi} repeats a property in its scope")
            continue
        covered.update(f.scope)
        doms = [property_domain(props[p], n) for p in f.scope]
        size = 1
        for d in doms:
            size *= len(d)
        if size > 2_000_000:
            errors.append(f"factor {fi} table too large ({size})")
            continue
        for key in f.table:
            if len(key) != len(f.scope) or any(v not in d for v, d in zip(key, doms)):
                errors.append(f"factor {fi} has an entry outside its domains: {key}")
                break
        if len(f.table) != size:
            missing = next(k for k in itertools.product(*doms) if k not in f.table)
            errors.append(f"factor {fi} table is not total (missing {missing})")
    for p in required:
        if p not in covered:
            errors.append(f"property {p} appears in no factor")
    return errors


def gai_value(g: GAIFunction, a: Assignment) -> float:
    missing = [p for p in g.scope_ids() if p not in a]
    if missing:
        raise ModelError(f"partial assignment, missing {missing}")
    return sum(f.lookup(a) for f in g.factors)


def _factor_max(f: Factor, allowed: list) -> float:
    size = 1
    for s in allowed:
        size *= len(s)
    if size == 0:
        return float("-inf")
    if size <= len(f.table):
        return max(f.table[k] for k in itertools.product(*allowed))
    best = float("-inf")
    for key, v in f.table.items():
        if v > best and all(x in s for x, s in zip(key, allowed)):
            best = v
    return best


def upper_bound(g: GAIFunction, reach: Mapping[str, Iterable]) -> float:
    """Sum of per-factor maxima over individually reachable values (admissible)."""
    total = 0.0
    for f in g.factors:
        allowed = [reach[p] if isinstance(reach[p], (set, frozenset, range)) else set(reach[p]) for p in f.scope]
        total += _factor_max(f, allowed)
    return total


def compile_tcpnet_to_gai(net: TCPNet, props: Mapping[str, SetProperty], n: int) -> GAIFunction:
    """One integer factor per node over the node and its cp-parents.

    Within each parent context a value scores its CP rank (worst 0). A node's factor is
    scaled so that one step on it outweighs the total range of every node below it in
    the combined cp/importance graph; hence both parents and more important nodes
    dominate.
    """
    errs = validate_tcpnet(net, props, n)
    if errs:
        raise ModelError(errs)
    order = topo_property_order(net)
    succ = {v: set() for v in net.nodes}
    for a, b in net.edges():
        succ[a].add(b)
    below = {}
    for v in reversed(order):
        acc = set()
        for w in succ[v]:
            acc.add(w)
            acc |= below[w]
        below[v] = acc
    weight = {}
    span = {}
    for v in reversed(order):
        weight[v] = 1 + sum(span[q] for q in below[v])
        span[v] = weight[v] * (len(property_domain(props[v], n)) - 1)
    factors = {}
    for v in order:
        parents = net.parents(v)
        doms = [property_domain(props[q], n) for q in parents]
        table = {}
        for combo in itertools.product(*doms):
            ctx = dict(zip(parents, combo))
            prefs = preferred_value_order(net, v, ctx, n)
            worst = len(prefs) - 1
            for r, val in enumerate(prefs):
                table[combo + (val,)] = weight[v] * (worst - r)
        factors[v] = Factor(tuple(parents) + (v,), table)
    return GAIFunction([factors[v] for v in net.nodes])


# ---------------------------------------------------------------------------
# combined model and JSON form


@dataclass
class PreferenceModel:
    kind: str  # "tcp" | "gai"
    properties: list  # ids
    gai: GAIFunction
    tcp: TCPNet | None = None
    cardinality: int | None = None

    def value(self, a: Assignment) -> float:
        return gai_value(self.gai, a)


def _jval(v):
    if isinstance(v, str) and v.lower() in ("true", "false", "t", "f"):
        return v.lower() in ("true", "t")
    return v


def _row_key(row, scope, props):
    if isinstance(row, Mapping):
        return tuple(_jval(row[p]) for p in scope), row["value"]
    *vals, value = row
    if len(vals) != len(scope):
        raise ModelError(f"table row {row} does not match scope {list(scope)}")
    return tuple(_jval(v) for v in vals), value


def model_from_json(data: Mapping, props: Sequence[SetProperty], n: int) -> PreferenceModel:
    by_id = {p.id: p for p in props}
    kind = data.get("kind")
    if kind not in ("tcp", "gai"):
        raise ModelError("model kind must be 'tcp' or 'gai'")
    ids = list(data.get("properties") or [p.id for p in props])
    for pid in ids:
        if pid not in by_id:
            raise ModelError(f"unknown property {pid!r}")
    card = data.get("cardinality")
    k = None
    if card is not None:
        k = int(card["k"] if isinstance(card, Mapping) else card)
        if k < 0:
            raise ModelError("cardinality must be non-negative")
    if kind == "tcp":
        if data.get("ci_arcs"):
            raise ModelError("conditional importance arcs are not supported")
        tables = {}
        for pid, t in (data.get("cp_tables") or {}).items():
            if isinstance(t, str):
                tables[pid] = t
            elif t and isinstance(t[0], Mapping):
                tables[pid] = [CPRow({q: _jval(v) for q, v in r.get("when", {}).items()},
                                     tuple(_jval(v) for v in r["order"])) for r in t]
            else:
                tables[pid] = [CPRow({}, tuple(_jval(v) for v in t))]
        net = TCPNet(ids, [tuple(a) for a in data.get("cp_arcs", [])], tables,
                     [tuple(a) for a in data.get("i_arcs", [])])
        errs = validate_tcpnet(net, by_id, n)
        if errs:
            raise ModelError(errs)
        return PreferenceModel("tcp", ids, compile_tcpnet_to_gai(net, by_id, n), net, k)
    factors = []
    for f in data.get("factors", []):
        scope = tuple(f["scope"])
        table = {}
        default = f.get("default")
        if default is not None:
            doms = [property_domain(by_id[p], n) for p in scope]
            table = {key: default for key in itertools.product(*doms)}
        for row in f.get("table", []):
            key, value = _row_key(row, scope, by_id)
            table[key] = value
        factors.append(Factor(scope, table))
    g = GAIFunction(factors)
    errs = validate_gai(g, by_id, n, required=ids)
    if errs:
        raise ModelError(errs)
    return PreferenceModel("gai", ids, g, None, k)


def load_model(source, props: Sequence[SetProperty], n: int) -> PreferenceModel:
    if hasattr(source, "read"):
        source = source.read()
    data = json.loads(source) if isinstance(source, (str, bytes)) else source
    return model_from_json(data, props, n)


def model_to_json(model: PreferenceModel) -> dict:
    out: dict = {"kind": model.kind, "properties": list(model.properties)}
    if model.tcp is not None:
        net = model.tcp
        out["cp_arcs"] = [list(a) for a in net.cp_arcs]
        out["i_arcs"] = [list(a) for a in net.i_arcs]
        tables = {}
        for pid, t in net.cp_tables.items():
            tables[pid] = t if isinstance(t, str) else [{"when": r.when, "order": list(r.order)} for r in t]
        out["cp_tables"] = tables
    else:
        out["factors"] = [{"scope": list(f.scope), "table": [list(k) + [v] for k, v in f.table.items()]}
                          for f in model.gai.factors]
    if model.cardinality is not None:
        out["cardinality"] = {"k": model.cardinality}
    return out


def tcp_model(props: Sequence[SetProperty], n: int, cp_arcs=(), cp_tables=None, i_arcs=(), cardinality=None) -> PreferenceModel:
    """Build a TCP model in code. ``cp_tables`` maps id -> order | [(when, order), ...]."""
    tables = {}
    for pid, t in (cp_tables or {}).items():
        if isinstance(t, str):
            tables[pid] = t
        elif t and isinstance(t[0], tuple) and len(t[0]) == 2 and isinstance(t[0][0], Mapping):
            tables[pid] = [CPRow(dict(w), tuple(o)) for w, o in t]
        else:
            tables[pid] = [CPRow({}, tuple(t))]
    for p in props:
        if p.id not in tables and p.is_boolean and not any(b == p.id for _, b in cp_arcs):
            tables[p.id] = [CPRow({}, (True, False))]
    by_id = {p.id: p for p in props}
    net = TCPNet([p.id for p in props], [tuple(a) for a in cp_arcs], tables, [tuple(a) for a in i_arcs])
    errs = validate_tcpnet(net, by_id, n)
    if errs:
        raise ModelError(errs)
    return PreferenceModel("tcp", net.nodes, compile_tcpnet_to_gai(net, by_id, n), net, cardinality)


def gai_model(props: Sequence[SetProperty], n: int, factors, cardinality=None) -> PreferenceModel:
    """``factors``: iterable of (scope, {values-tuple: number})."""
    by_id = {p.id: p for p in props}
    g = GAIFunction([Factor(tuple(s), {tuple(k) if isinstance(k, tuple) else (k,): v for k, v in t.items()})
                     for s, t in factors])
    errs = validate_gai(g, by_id, n, required=by_id)
    if errs:
        raise ModelError(errs)
    return PreferenceModel("gai", [p.id for p in props], g, None, cardinality)
