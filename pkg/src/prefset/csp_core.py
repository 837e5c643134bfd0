"""Backtracking solver for conjunctions of cardinality constraints over 0/1 item variables.

Variables are visited in a static order with value order <1, 0>; an unassigned
variable counts as 0, so every search node is itself a candidate subset. Search
nodes are therefore enumerated in pre-order of the set-enumeration tree and the
solver returns the first satisfying subset in that order (at or after an optional
warm-start subset).

Pruning rules (each can be switched off):

* monotonic -- a constraint whose smallest reachable value already exceeds its
  upper limit can never be repaired by adding items;
* fc -- a constraint whose largest reachable value is below its lower limit;
* can_must -- a constraint that must still gain ``p`` items while another one can
  absorb at most ``q < p`` more, when every remaining item that helps the first
  also counts against the second;
* nogoods -- (influence vector, depth) records: the per-feature counts of a
  failed node together with the position it failed at. A later node with the
  same counts at the same or a deeper position has no more extension options,
  so it fails too.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import accumulate
from typing import Iterable, Mapping, Sequence

from .catalog import compare

INF = 1 << 60


class SearchTimeout(Exception):
    """Raised when a deadline or node budget is exhausted."""


@dataclass(frozen=True, init=False)
class CardinalityConstraint:
    """``sum(coef * x_item) REL bound`` over the items in the scope."""

    id: str
    terms: tuple[tuple[int, int], ...]
    rel: str
    bound: int

    def __init__(self, id: str, coefs, rel: str, bound: int):
        items = coefs.items() if isinstance(coefs, Mapping) else coefs
        object.__setattr__(self, "id", id)
        object.__setattr__(self, "terms", tuple(sorted((int(i), int(c)) for i, c in items if c)))
        object.__setattr__(self, "rel", rel)
        object.__setattr__(self, "bound", int(bound))

    @property
    def scope(self) -> list[int]:
        return [i for i, _ in self.terms]

    @property
    def coefs(self) -> dict[int, int]:
        return dict(self.terms)

    @property
    def signed(self) -> bool:
        return any(c < 0 for _, c in self.terms)

    def value(self, selected: Iterable[int]) -> int:
        sel = set(selected)
        return sum(c for i, c in self.terms if i in sel)

    def holds(self, value: int) -> bool:
        return compare(value, self.rel, self.bound)

    def satisfied_by(self, selected: Iterable[int]) -> bool:
        return self.holds(self.value(selected))

    def limits(self) -> tuple[int, int]:
        """Allowed value interval; ``!=`` reports the whole line (its hole is separate)."""
        r, k = self.rel, self.bound
        if r == "=":
            return k, k
        if r == "<=":
            return -INF, k
        if r == "<":
            return -INF, k - 1
        if r == ">=":
            return k, INF
        if r == ">":
            return k + 1, INF
        return -INF, INF

    def dump(self) -> str:
        body = ",".join(f"{'+' if c > 0 else '-'}{i}" if abs(c) == 1 else f"{c:+d}*{i}" for i, c in self.terms)
        return f"{self.id}: [{body}] {self.rel} {self.bound}"


@dataclass(frozen=True)
class Solution:
    """A satisfying subset plus the variable order it was found under."""

    items: frozenset
    order: tuple

    def bits(self, n: int) -> tuple[int, ...]:
        return tuple(1 if i in self.items else 0 for i in range(n))


@dataclass
class CSPInstance:
    num_vars: int
    constraints: list[CardinalityConstraint]
    var_order: tuple[int, ...] | None = None
    # item sets whose selected-counts form the influence vector; they must determine
    # every constraint value. Defaults to each constraint's positive/negative scope.
    tracked: tuple[frozenset, ...] | None = None

    def __post_init__(self):
        if self.var_order is None:
            self.var_order = tuple(range(self.num_vars))
        self.var_order = tuple(self.var_order)
        if sorted(self.var_order) != list(range(self.num_vars)):
            raise ValueError("var_order must be a permutation of the variables")
        if self.tracked is None:
            feats = []
            for c in self.constraints:
                feats.append(frozenset(i for i, k in c.terms if k > 0))
                feats.append(frozenset(i for i, k in c.terms if k < 0))
            self.tracked = tuple(feats)

    def is_solution(self, selected: Iterable[int]) -> bool:
        sel = set(selected)
        return all(c.satisfied_by(sel) for c in self.constraints)

    def dump(self) -> str:
        return "\n".join(c.dump() for c in self.constraints)


@dataclass
class SolveStats:
    nodes: int = 0
    backtracks: int = 0
    nogoods_recorded: int = 0
    nogood_hits: int = 0
    fc_prunes: int = 0
    monotonic_prunes: int = 0
    can_must_prunes: int = 0
    solves: int = 0
    wall_ms: float = 0.0

    def add(self, other: "SolveStats") -> None:
        for k in self.__dataclass_fields__:
            setattr(self, k, getattr(self, k) + getattr(other, k))

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class SolverConfig:
    fc: bool = True
    monotonic: bool = True
    can_must: bool = True
    nogoods: bool = False
    nogood_cap: int = 1_000_000
    debug: bool = False
    deadline: float | None = None  # time.monotonic() value
    node_limit: int | None = None


class NoGoodStore:
    """Influence vector -> smallest depth it failed at.

    Stores chain to a parent: entries learned under a subset of the current
    constraints stay valid, so lookups fall through to the parent layers.
    """

    def __init__(self, parent: "NoGoodStore | None" = None, cap: int = 1_000_000):
        self.parent = parent
        self.cap = cap
        self.table: dict[tuple, int] = {}

    def __len__(self) -> int:
        return len(self.table)

    def record(self, vector: tuple, depth: int) -> None:
        old = self.table.get(vector)
        if old is None:
            if len(self.table) >= self.cap:
                del self.table[next(iter(self.table))]
            self.table[vector] = depth
        elif depth < old:
            self.table[vector] = depth

    def match(self, vector: tuple, depth: int) -> bool:
        store = self
        while store is not None:
            d = store.table.get(vector)
            if d is not None and d <= depth:
                return True
            store = store.parent
        return False

    def child(self) -> "NoGoodStore":
        return NoGoodStore(self, self.cap)


def record_nogood(store: NoGoodStore, vector: tuple, depth: int) -> None:
    store.record(tuple(vector), depth)


def match_nogood(store: NoGoodStore, vector: tuple, depth: int) -> bool:
    return store.match(tuple(vector), depth)


# ---------------------------------------------------------------------------
# the individual pruning tests, in the single-constraint form


def monotonic_prune(constraint: CardinalityConstraint, current_count: int) -> bool:
    """True iff the count already exceeds what the constraint tolerates (counts only grow)."""
    if constraint.signed:
        return False
    _, hi = constraint.limits()
    if constraint.rel == "!=":
        return False
    return current_count > hi


def forward_check(constraint: CardinalityConstraint, current_count: int, remaining_satisfiers: int) -> bool:
    """False iff more satisfiers are needed than remain."""
    lo, _ = constraint.limits()
    return lo - current_count <= remaining_satisfiers


@dataclass
class PairState:
    need_count: int
    cap_count: int
    remaining_need: int
    remaining_cap: int
    remaining_need_not_cap: int


def can_must_check(c_need: CardinalityConstraint, c_cap: CardinalityConstraint, state: PairState) -> bool:
    """True iff ``c_need`` and ``c_cap`` can no longer both be satisfied."""
    lo, _ = c_need.limits()
    _, hi = c_cap.limits()
    must = lo - state.need_count
    can = hi - state.cap_count
    return must > 0 and must > can and state.remaining_need_not_cap == 0


def static_order(csp: CSPInstance, scores: Sequence[float] | None = None) -> tuple[int, ...]:
    """Most-constrained-first item order; ties by descending score, then index."""
    degree = [0] * csp.num_vars
    for c in csp.constraints:
        for i, _ in c.terms:
            degree[i] += 1
    sc = scores if scores is not None else [0.0] * csp.num_vars
    return tuple(sorted(range(csp.num_vars), key=lambda i: (-degree[i], -sc[i], i)))


# ---------------------------------------------------------------------------
# solver


class SolverContext:
    """Per-ordering caches shared by every CSP solved under one static variable order."""

    def __init__(self, num_vars: int, var_order: Sequence[int], tracked: Sequence[frozenset]):
        self.num_vars = num_vars
        self.var_order = tuple(var_order)
        self.tracked = tuple(tracked)
        self.pos_of = [0] * num_vars
        for p, i in enumerate(self.var_order):
            self.pos_of[i] = p
        self.item_feats: list[list[int]] = [[] for _ in range(num_vars)]
        for f, s in enumerate(self.tracked):
            for i in s:
                self.item_feats[i].append(f)
        self._suffix: dict[CardinalityConstraint, tuple[list[int], list[int]]] = {}
        self._pair: dict[tuple, list[int] | None] = {}
        self._triple: dict[tuple, list[int]] = {}

    def _suffix_counts(self, marks: list[int]) -> list[int]:
        # marks indexed by position; returns s[p] = sum(marks[p:])
        out = list(accumulate(reversed(marks)))
        out.reverse()
        out.append(0)
        return out

    def suffix(self, c: CardinalityConstraint) -> tuple[list[int], list[int]]:
        got = self._suffix.get(c)
        if got is None:
            pos = [0] * self.num_vars
            neg = [0] * self.num_vars
            for i, k in c.terms:
                if k > 0:
                    pos[self.pos_of[i]] += k
                else:
                    neg[self.pos_of[i]] -= k
            got = (self._suffix_counts(pos), self._suffix_counts(neg))
            self._suffix[c] = got
        return got

    def pair(self, need: CardinalityConstraint, cap: CardinalityConstraint) -> list[int] | None:
        key = (need, cap)
        if key not in self._pair:
            cap_scope = set(cap.scope)
            need_scope = need.scope
            if cap_scope.isdisjoint(need_scope):
                self._pair[key] = None
            else:
                marks = [0] * self.num_vars
                for i in need_scope:
                    if i not in cap_scope:
                        marks[self.pos_of[i]] = 1
                self._pair[key] = self._suffix_counts(marks)
        return self._pair[key]

    def shared(self, a: CardinalityConstraint, b: CardinalityConstraint, cap: CardinalityConstraint) -> list[int]:
        """Suffix counts of items lying in all three scopes."""
        key = (a, b, cap)
        got = self._triple.get(key)
        if got is None:
            common = set(a.scope).intersection(b.scope).intersection(cap.scope)
            marks = [0] * self.num_vars
            for i in common:
                marks[self.pos_of[i]] = 1
            got = self._suffix_counts(marks)
            self._triple[key] = got
        return got


def solve(
    csp: CSPInstance,
    config: SolverConfig | None = None,
    warm_start: Solution | None = None,
    store: NoGoodStore | None = None,
    context: SolverContext | None = None,
    stats: SolveStats | None = None,
) -> tuple[Solution | None, SolveStats]:
    """First satisfying subset in set-enumeration pre-order at or after ``warm_start``.

    ``warm_start`` must come from the same variable order and be the first solution of
    a CSP whose constraints are a subset of this one's (so nothing before it can be a
    solution here). NoGoods are recorded into ``store``; its parent layers are only
    consulted.
    """
    config = config or SolverConfig()
    stats = stats if stats is not None else SolveStats()
    t0 = time.perf_counter()
    try:
        return _solve(csp, config, warm_start, store, context, stats), stats
    finally:
        stats.solves += 1
        stats.wall_ms += (time.perf_counter() - t0) * 1000.0


def _solve(csp, config, warm_start, store, context, stats):
    n = csp.num_vars
    order = csp.var_order
    if context is None:
        context = SolverContext(n, order, csp.tracked)
    elif context.var_order != order:
        raise ValueError("solver context built for a different variable order")
    if warm_start is not None and tuple(warm_start.order) != order:
        raise ValueError("warm start was produced under a different variable order")
    cons = csp.constraints
    for c in cons:
        if not c.terms and not c.holds(0):
            return None
    if config.nogoods and store is None:
        store = NoGoodStore(cap=config.nogood_cap)

    C = len(cons)
    lo_ok = [0] * C
    hi_ok = [0] * C
    ne_k: list[int | None] = [None] * C
    pos_suf = []
    neg_suf = []
    item_cons: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for ci, c in enumerate(cons):
        lo_ok[ci], hi_ok[ci] = c.limits()
        if c.rel == "!=":
            ne_k[ci] = c.bound
        ps, ns = context.suffix(c)
        pos_suf.append(ps)
        neg_suf.append(ns)
        for i, k in c.terms:
            item_cons[i].append((ci, k))
    has_ne = any(k is not None for k in ne_k)
    pairs = []
    twins = []
    disjoint = []
    if config.can_must:
        needs = [a for a, ca in enumerate(cons) if not ca.signed and lo_ok[a] > 0]
        caps = [b for b, cb in enumerate(cons) if not cb.signed and hi_ok[b] < INF]
        outside = {}
        for a in needs:
            for b in caps:
                if a == b:
                    continue
                suf = context.pair(cons[a], cons[b])
                if suf is not None:
                    pairs.append((a, b, suf))
                    outside[a, b] = suf
        # two musts sharing one can: items inside both musts count once against the can
        for x, a in enumerate(needs):
            for b in needs[x + 1:]:
                for c in caps:
                    if c in (a, b) or (a, c) not in outside or (b, c) not in outside:
                        continue
                    twins.append((a, b, c, outside[a, c], outside[b, c],
                                  context.shared(cons[a], cons[b], cons[c])))
        # three or more musts that share no item inside one can: their demands add up
        for c in caps:
            group = [a for a in needs if a != c and (a, c) in outside]
            apart = {a: {b for b in group if b != a and context.shared(cons[a], cons[b], cons[c])[0] == 0}
                     for a in group}
            for clique in _maximal_cliques(apart):
                if len(clique) >= 3:
                    disjoint.append((c, [(a, outside[a, c]) for a in sorted(clique)]))
    item_feats = context.item_feats
    val = [0] * C
    infl = [0] * len(context.tracked)

    def holds(ci, v):
        return lo_ok[ci] <= v <= hi_ok[ci] and v != ne_k[ci]

    violated = sum(1 for ci in range(C) if not holds(ci, 0))

    def apply(item, sign):
        nonlocal violated
        for ci, k in item_cons[item]:
            old = val[ci]
            new = old + sign * k
            val[ci] = new
            violated += (not holds(ci, new)) - (not holds(ci, old))
        for f in item_feats[item]:
            infl[f] += sign

    use_mono, use_fc, use_ng = config.monotonic, config.fc, config.nogoods
    deadline, node_limit = config.deadline, config.node_limit

    def viable(i):
        for ci in range(C):
            v = val[ci]
            lo = v - neg_suf[ci][i]
            hi = v + pos_suf[ci][i]
            if use_mono and lo > hi_ok[ci]:
                stats.monotonic_prunes += 1
                return False
            if use_fc and hi < lo_ok[ci]:
                stats.fc_prunes += 1
                return False
            if has_ne and use_mono and use_fc and lo == hi == ne_k[ci]:
                stats.fc_prunes += 1
                return False
        for a, b, suf in pairs:
            # items of a outside b's scope are free; the rest must fit under b's limit
            if lo_ok[a] - val[a] - suf[i] > hi_ok[b] - val[b]:
                stats.can_must_prunes += 1
                return False
        for a, b, c, out_a, out_b, both in twins:
            pa = lo_ok[a] - val[a] - out_a[i]
            if pa <= 0:
                continue
            pb = lo_ok[b] - val[b] - out_b[i]
            if pb <= 0:
                continue
            if pa + pb - min(both[i], pa, pb) > hi_ok[c] - val[c]:
                stats.can_must_prunes += 1
                return False
        for c, members in disjoint:
            demand = 0
            for a, out_a in members:
                pa = lo_ok[a] - val[a] - out_a[i]
                if pa > 0:
                    demand += pa
            if demand > hi_ok[c] - val[c]:
                stats.can_must_prunes += 1
                return False
        if use_ng and store.match(tuple(infl), i):
            stats.nogood_hits += 1
            return None
        return True

    def check_influence():
        sel = {order[p] for p, v in stack if v}
        for f, s in enumerate(context.tracked):
            assert infl[f] == len(s & sel), "influence vector out of sync"

    stack: list[tuple[int, int]] = []
    if warm_start is not None and warm_start.items:
        pos_of = context.pos_of
        last = max(pos_of[i] for i in warm_start.items)
        for p in range(last + 1):
            v = 1 if order[p] in warm_start.items else 0
            stack.append((p, v))
            if v:
                apply(order[p], 1)
        i = last + 1
    else:
        i = 0
    if violated == 0:
        return Solution(frozenset(order[p] for p, v in stack if v), order)

    nodes = 0
    while True:
        nodes += 1
        if nodes & 1023 == 0:
            if deadline is not None and time.monotonic() > deadline:
                stats.nodes += nodes
                raise SearchTimeout()
            if node_limit is not None and stats.nodes + nodes > node_limit:
                stats.nodes += nodes
                raise SearchTimeout()
        if config.debug:
            check_influence()
        ok = viable(i) if i < n else False
        if ok:
            apply(order[i], 1)
            stack.append((i, 1))
            i += 1
            if violated == 0:
                stats.nodes += nodes
                return Solution(frozenset(order[p] for p, v in stack if v), order)
            continue
        if use_ng and ok is False and i < n:
            store.record(tuple(infl), i)
            stats.nogoods_recorded += 1
        while stack:
            p, v = stack.pop()
            stats.backtracks += 1
            if v:
                apply(order[p], -1)
                stack.append((p, 0))
                i = p + 1
                break
            if use_ng:
                store.record(tuple(infl), p)
                stats.nogoods_recorded += 1
        else:
            stats.nodes += nodes
            return None


def _maximal_cliques(adj: dict, limit: int = 64) -> list:
    """Bron-Kerbosch without pivoting; the graphs here have a dozen vertices at most."""
    out = []

    def grow(r, p, x):
        if len(out) >= limit:
            return
        if not p and not x:
            out.append(r)
            return
        for v in sorted(p):
            grow(r | {v}, p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    grow(frozenset(), set(adj), set())
    return out


def brute_force_solutions(csp: CSPInstance) -> list[frozenset]:
    """Every solution, in the solver's enumeration order (reference for tests)."""
    n = csp.num_vars
    order = csp.var_order
    out = []

    def rec(p, sel):
        if csp.is_solution(sel):
            out.append(frozenset(sel))
        for q in range(p, n):
            sel.append(order[q])
            rec(q + 1, sel)
            sel.pop()

    rec(0, [])
    return out
