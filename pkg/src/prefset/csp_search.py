"""Branch and bound over partial property assignments, one cardinality CSP per tree node.

Every tree node is solved, including intermediate ones. Because the item order and
the <1, 0> value order are fixed for the whole run, the witness of a node is always
the first solution of its CSP in set-enumeration order. A child's CSP only adds
constraints, so its first solution lies at or after the parent's; that is what makes
resuming from the parent witness valid and what keeps all the speed-ups from
changing any answer.
"""
from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

from .catalog import TRUE
from .csp_core import (
    CardinalityConstraint,
    CSPInstance,
    NoGoodStore,
    SearchTimeout,
    Solution,
    SolverConfig,
    SolverContext,
    SolveStats,
    solve,
    static_order,
)
from .prefmodel import preferred_value_order, topo_property_order, upper_bound
from .problem import Problem, SearchResult, infeasible_result, mask_of
from .properties import eval_on_mask, property_to_constraints, reachable_from_masks

NEG_INF = float("-inf")
CARD_ID = "C"


@dataclass
class CSPSearchConfig:
    mode: str | None = None  # "tcp" | "gai"; defaults to the model's kind
    strategy: str = "dfs"  # "dfs" | "bfs" (bfs only affects gai mode)
    warm_start: bool = True
    sibling: bool = True
    nogoods: bool = True
    fc: bool = True
    can_must: bool = True
    monotonic: bool = True
    var_order: str = "static"  # "static" | "index"
    timeout: float | None = None
    node_limit: int | None = None
    trace: bool = False
    debug: bool = False


VARIANTS = {
    "BB-S": dict(warm_start=False, sibling=False, nogoods=False),
    "BB-S+ng": dict(warm_start=False, sibling=False, nogoods=True),
    "BB-S+inc": dict(warm_start=True, sibling=True, nogoods=False),
    "BB-S+ng+inc": dict(warm_start=True, sibling=True, nogoods=True),
}


def variant_config(name: str, **overrides) -> CSPSearchConfig:
    kw = dict(VARIANTS[name])
    kw.update(overrides)
    return CSPSearchConfig(**kw)


def cardinality_constraint(n: int, k: int) -> CardinalityConstraint:
    return CardinalityConstraint(CARD_ID, {i: 1 for i in range(n)}, "=", k)


def build_csp(alpha: dict, catalog, props, cardinality: int | None = None, var_order=None, tracked=None) -> CSPInstance:
    """CSP whose solutions are exactly the subsets matching ``alpha`` (and the size, if set)."""
    by_id = {p.id: p for p in props}
    cons = []
    if cardinality is not None:
        cons.append(cardinality_constraint(len(catalog), cardinality))
    for pid, v in alpha.items():
        cons.extend(property_to_constraints(by_id[pid], v, catalog))
    if tracked is None:
        tracked = tracked_sets(catalog, props)
    return CSPInstance(len(catalog), cons, var_order, tracked)


def tracked_sets(catalog, props) -> tuple[frozenset, ...]:
    """Satisfier sets of every formula in play; their counts fix every constraint value."""
    seen = {}
    for f in [TRUE] + [f for p in props for f in p.formulas]:
        m = catalog.mask(f)
        if m not in seen:
            seen[m] = frozenset(catalog.satisfiers(f))
    return tuple(seen.values())


def sibling_inference(parent_witness: Solution, prop, value, failed_value, catalog) -> Solution:
    """The parent witness serves the boolean sibling whose value it already has."""
    if not prop.is_boolean:
        raise ValueError(f"sibling inference needs a boolean property, {prop.id} is a counter")
    if value == failed_value:
        raise ValueError("the sibling must carry the other value")
    got = eval_on_mask(prop, catalog, mask_of(parent_witness.items))
    if got != value:
        raise ValueError("parent witness does not carry the sibling's value")
    return parent_witness


@dataclass
class _Node:
    alpha: dict
    depth: int
    ub: float
    parent_witness: Solution | None
    parent_store: NoGoodStore | None
    tried: dict = field(default_factory=dict)  # shared among siblings: value -> witness or None


class _Searcher:
    def __init__(self, problem: Problem, config: CSPSearchConfig):
        self.p = problem
        self.cfg = config
        self.cat = problem.catalog
        self.n = problem.n
        self.k = problem.cardinality
        self.mode = config.mode or problem.model.kind
        if self.mode == "tcp" and problem.model.tcp is None:
            raise ValueError("tcp mode needs a TCP-net model")
        self.gai = problem.model.gai
        self.stats = SolveStats()
        self.counts = {"csps_solved": 0, "property_backtracks": 0, "nodes": 0, "bound_prunes": 0,
                       "verified_in_place": 0, "sibling_inferences": 0}
        self.trace: list = []
        self.deadline = None if config.timeout is None else time.monotonic() + config.timeout
        self.solver_cfg = SolverConfig(fc=config.fc, monotonic=config.monotonic, can_must=config.can_must,
                                       nogoods=config.nogoods, debug=config.debug, deadline=self.deadline,
                                       node_limit=config.node_limit)
        self._cons: dict = {}
        full = (1 << self.n) - 1
        self.reach0 = {}
        for p in problem.props:
            r = reachable_from_masks(p, self.cat, 0, full, self.k)
            dom = p.domain(self.n)
            self.reach0[p.id] = [v for v in dom if v in r]
        self.tracked = tracked_sets(self.cat, problem.props)
        self.var_order = self._variable_order()
        self.ctx = SolverContext(self.n, self.var_order, self.tracked)

    # -- setup ---------------------------------------------------------------

    def _variable_order(self) -> tuple:
        if self.cfg.var_order == "index":
            return tuple(range(self.n))
        from .subset_search import item_scores

        cons = []
        for p in self.p.props:
            v = True if p.is_boolean else 0
            for c in property_to_constraints(p, v, self.cat):
                cons.append(CardinalityConstraint(c.id, {i: 1 for i in c.scope}, ">=", 0))
        scores = item_scores(self.p, 0, 0, -1)
        return static_order(CSPInstance(self.n, cons, None, ()), [scores.get(i, 0.0) for i in range(self.n)])

    def constraints(self, alpha: dict) -> list:
        out = []
        if self.k is not None:
            key = (CARD_ID, self.k)
            if key not in self._cons:
                self._cons[key] = [cardinality_constraint(self.n, self.k)]
            out.extend(self._cons[key])
        for pid, v in alpha.items():
            key = (pid, v)
            if key not in self._cons:
                self._cons[key] = property_to_constraints(self.p.by_id[pid], v, self.cat)
            out.extend(self._cons[key])
        return out

    def property_order(self) -> list:
        if self.mode == "tcp":
            return topo_property_order(self.p.model.tcp)
        span = {p.id: 0.0 for p in self.p.props}
        for f in self.gai.factors:
            s = f.span()
            for pid in f.scope:
                span[pid] = max(span[pid], s)
        decl = {p.id: i for i, p in enumerate(self.p.props)}
        return sorted(span, key=lambda pid: (-span[pid], decl[pid]))

    # -- node solving ----------------------------------------------------------

    def solve_node(self, alpha: dict, parent_witness: Solution | None, store: NoGoodStore | None,
                   inferred: bool) -> tuple[Solution | None, NoGoodStore | None]:
        own = None
        if self.cfg.nogoods:
            own = store.child() if store is not None else NoGoodStore()
        if inferred:
            self.counts["sibling_inferences"] += 1
            self._record(alpha, parent_witness, 0, "inferred")
            return parent_witness, own
        csp = CSPInstance(self.n, self.constraints(alpha), self.var_order, self.tracked)
        warm = parent_witness if self.cfg.warm_start else None
        before = self.stats.backtracks
        t0 = time.perf_counter()
        try:
            sol, _ = solve(csp, self.solver_cfg, warm, own, self.ctx, self.stats)
        except SearchTimeout:
            self._record(alpha, None, self.stats.backtracks - before, "timeout", t0)
            raise
        self.counts["csps_solved"] += 1
        bt = self.stats.backtracks - before
        how = "solved"
        if warm is not None and sol is not None and sol.items == warm.items:
            self.counts["verified_in_place"] += 1
            how = "verified"
        if sol is not None:
            self._check(alpha, sol)
        self._record(alpha, sol, bt, how, t0)
        return sol, own

    def _check(self, alpha, sol):
        m = mask_of(sol.items)
        for pid, v in alpha.items():
            if eval_on_mask(self.p.by_id[pid], self.cat, m) != v:
                raise AssertionError(f"witness disagrees with {pid}={v}")
        if self.k is not None and len(sol.items) != self.k:
            raise AssertionError("witness violates the cardinality")

    def _record(self, alpha, sol, backtracks, how, t0=None):
        if self.cfg.trace:
            bits = None if sol is None else tuple(1 if i in sol.items else 0 for i in range(self.n))
            ms = 0.0 if t0 is None else (time.perf_counter() - t0) * 1000.0
            self.trace.append({"alpha": dict(alpha), "witness": bits, "backtracks": backtracks, "how": how,
                               "ms": ms})

    def child_witness(self, node: _Node, prop, value) -> tuple[Solution | None, NoGoodStore | None]:
        w = node.parent_witness
        inferred = False
        if self.cfg.sibling and prop.is_boolean and w is not None:
            other = not value
            if other in node.tried and node.tried[other] != w:
                # the sibling's search moved past w, so w carries this value
                inferred = eval_on_mask(prop, self.cat, mask_of(w.items)) == value
        return self.solve_node(node.alpha, w, node.parent_store, inferred)

    def assignment_of(self, sol: Solution) -> dict:
        return self.p.assignment_of_mask(mask_of(sol.items))

    def stats_dict(self, t0) -> dict:
        out = dict(self.counts)
        out["item_backtracks"] = self.stats.backtracks
        out["solver_nodes"] = self.stats.nodes
        out["nogoods_recorded"] = self.stats.nogoods_recorded
        out["nogood_hits"] = self.stats.nogood_hits
        out["fc_prunes"] = self.stats.fc_prunes
        out["monotonic_prunes"] = self.stats.monotonic_prunes
        out["can_must_prunes"] = self.stats.can_must_prunes
        out["wall_ms"] = (time.perf_counter() - t0) * 1000.0
        return out

    # -- the two modes ----------------------------------------------------------

    def run(self) -> SearchResult:
        t0 = time.perf_counter()
        engine = f"csp-{self.mode}"
        order = self.property_order()
        try:
            root, store = self.solve_node({}, None, None, False)
        except SearchTimeout:
            res = infeasible_result(self.p, engine, self.stats_dict(t0), "timed out at the root")
            res.timed_out = True
            return res
        if root is None:
            return infeasible_result(self.p, engine, self.stats_dict(t0),
                                     "no subset satisfies the cardinality requirement")
        root_node = _Node({}, 0, NEG_INF, root, store)
        if self.mode == "tcp":
            return self._run_tcp(root_node, order, t0, engine)
        return self._run_gai(root_node, order, t0, engine)

    def _children(self, node: _Node, pid: str, values) -> list:
        tried: dict = {}
        out = []
        for v in values:
            alpha = dict(node.alpha)
            alpha[pid] = v
            out.append((v, _Node(alpha, node.depth + 1, NEG_INF, node.parent_witness, node.parent_store, tried)))
        return out

    def _run_tcp(self, root: _Node, order, t0, engine) -> SearchResult:
        net = self.p.model.tcp
        stack = [(None, None, root)]
        try:
            while stack:
                pid, v, node = stack.pop()
                self.counts["nodes"] += 1
                if pid is None:
                    sol, store = node.parent_witness, node.parent_store
                else:
                    sol, store = self.child_witness(node, self.p.by_id[pid], v)
                    node.tried[v] = sol
                    if sol is None:
                        self.counts["property_backtracks"] += 1
                        continue
                if node.depth == len(order):
                    return SearchResult(sol.items, dict(self.assignment_of(sol)), self.p.value_of_mask(mask_of(sol.items)),
                                        stats=self.stats_dict(t0), engine=engine)
                nxt = order[node.depth]
                allowed = set(self.reach0[nxt])
                values = [x for x in preferred_value_order(net, nxt, node.alpha, self.n) if x in allowed]
                base = _Node(node.alpha, node.depth, NEG_INF, sol, store)
                for val, child in reversed(self._children(base, nxt, values)):
                    stack.append((nxt, val, child))
        except SearchTimeout:
            res = infeasible_result(self.p, engine, self.stats_dict(t0), "timed out")
            res.timed_out = True
            return res
        return infeasible_result(self.p, engine, self.stats_dict(t0), "no full assignment is satisfiable")

    def _ub(self, alpha: dict) -> float:
        reach = {pid: ({alpha[pid]} if pid in alpha else set(vals)) for pid, vals in self.reach0.items()}
        return upper_bound(self.gai, reach)

    def _run_gai(self, root: _Node, order, t0, engine) -> SearchResult:
        best_sol = root.parent_witness
        best_val = self.p.value_of_mask(mask_of(best_sol.items))
        bfs = self.cfg.strategy == "bfs"
        seq = 0
        frontier: list = []

        def push(item):
            nonlocal seq
            seq += 1
            if bfs:
                heapq.heappush(frontier, (-item[2].ub, seq, item))
            else:
                frontier.append(item)

        def pop():
            return heapq.heappop(frontier)[2] if bfs else frontier.pop()

        push((None, None, root))
        timed_out = False
        try:
            while frontier:
                pid, v, node = pop()
                if pid is not None:
                    if node.ub <= best_val:
                        self.counts["bound_prunes"] += 1
                        continue
                    self.counts["nodes"] += 1
                    sol, store = self.child_witness(node, self.p.by_id[pid], v)
                    node.tried[v] = sol
                    if sol is None:
                        self.counts["property_backtracks"] += 1
                        continue
                    val = self.p.value_of_mask(mask_of(sol.items))
                    if val > best_val:
                        best_sol, best_val = sol, val
                else:
                    self.counts["nodes"] += 1
                    sol, store = node.parent_witness, node.parent_store
                if node.depth == len(order):
                    continue
                nxt = order[node.depth]
                base = _Node(node.alpha, node.depth, NEG_INF, sol, store)
                kids = []
                for val, child in self._children(base, nxt, self.reach0[nxt]):
                    child.ub = self._ub(child.alpha)
                    kids.append((nxt, val, child))
                kids.sort(key=lambda t: -t[2].ub)  # stable: domain order breaks ties
                kept = []
                for kid in kids:
                    if kid[2].ub <= best_val:
                        self.counts["bound_prunes"] += 1
                    else:
                        kept.append(kid)
                for kid in (kept if bfs else reversed(kept)):
                    push(kid)
        except SearchTimeout:
            timed_out = True
        stats = self.stats_dict(t0)
        return SearchResult(best_sol.items, self.assignment_of(best_sol), best_val, proven_optimal=not timed_out,
                            timed_out=timed_out, stats=stats, engine=engine)


def solve_csp_bnb(problem: Problem, config: CSPSearchConfig | None = None, **kw) -> SearchResult:
    config = config or CSPSearchConfig(**kw)
    s = _Searcher(problem, config)
    res = s.run()
    if config.trace:
        res.stats["trace"] = s.trace
    return res


def warm_start_solve(parent_witness: Solution | None, child_csp: CSPInstance, config: SolverConfig | None = None,
                     parent_unsat: bool = False):
    """Resume enumeration at the parent's witness; an UNSAT parent gives UNSAT at once."""
    if parent_unsat:
        return None, SolveStats()
    return solve(child_csp, config, parent_witness)
