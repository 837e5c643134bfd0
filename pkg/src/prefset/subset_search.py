"""Branch and bound directly over item subsets.

A node is a subset S with LB = value of S and UB = the sum of factor maxima over
property values still individually reachable by adding items to S. Children extend
S by one item whose index is above every index already in S, so each subset is
generated once.
"""
from __future__ import annotations

import heapq
import time
from dataclasses import dataclass

from .prefmodel import upper_bound
from .problem import Problem, SearchResult, infeasible_result, indices_of
from .properties import reachable_from_masks

NEG_INF = float("-inf")


@dataclass
class SubsetNode:
    mask: int
    size: int
    top: int  # highest item index in the subset, -1 for the empty set
    lb: float
    ub: float


class _Bounds:
    def __init__(self, problem: Problem):
        self.problem = problem
        self.n = problem.n
        self.full = (1 << self.n) - 1
        self.k = problem.cardinality

    def remaining(self, top: int) -> int:
        return self.full & ~((1 << (top + 1)) - 1)

    def reach(self, mask: int, size: int, top: int) -> dict | None:
        rem = self.remaining(top)
        add = None
        if self.k is not None:
            add = self.k - size
            if add < 0:
                return None
        out = {}
        for p in self.problem.props:
            r = reachable_from_masks(p, self.problem.catalog, mask, rem, add)
            if not r:
                return None
            out[p.id] = r
        return out

    def ub(self, mask: int, size: int, top: int) -> float:
        r = self.reach(mask, size, top)
        return NEG_INF if r is None else upper_bound(self.problem.model.gai, r)


def item_scores(problem: Problem, mask: int, size: int, top: int, bounds: _Bounds | None = None) -> dict:
    """Score of each candidate item: bound lost by freezing the properties it touches."""
    bounds = bounds or _Bounds(problem)
    reach = bounds.reach(mask, size, top)
    scores: dict[int, float] = {}
    if reach is None:
        return scores
    gai = problem.model.gai
    full_ub = upper_bound(gai, reach)
    cat = problem.catalog
    rem = bounds.remaining(top)
    current = problem.assignment_of_mask(mask)
    for p in problem.props:
        pinned = dict(reach)
        pinned[p.id] = {current[p.id]}
        gain = full_ub - upper_bound(gai, pinned)
        if gain <= 0:
            continue
        helps = cat.mask(p.phi)
        if p.psi is not None:
            helps |= cat.mask(p.psi)
        for i in indices_of(helps & rem):
            scores[i] = scores.get(i, 0.0) + gain
    return scores


def order_children(problem: Problem, mask: int, size: int, top: int, bounds: _Bounds | None = None) -> list[int]:
    """Candidate extension items, most promising first (ties by index)."""
    scores = item_scores(problem, mask, size, top, bounds)
    return sorted(range(top + 1, problem.n), key=lambda i: (-scores.get(i, 0.0), i))


def solve_subset_bnb(
    problem: Problem,
    strategy: str = "dfs",
    node_budget: int = 1_000_000,
    timeout: float | None = None,
    child_order: str = "heuristic",
    eager_prune: bool = True,
    trace: list | None = None,
) -> SearchResult:
    """Maximize the model's value over subsets (cardinality, when set, is a hard size)."""
    if strategy not in ("dfs", "bfs"):
        raise ValueError("strategy must be 'dfs' or 'bfs'")
    t0 = time.perf_counter()
    deadline = None if timeout is None else time.monotonic() + timeout
    bounds = _Bounds(problem)
    k = bounds.k
    engine = f"subset-{strategy}"
    stats = {"nodes_generated": 1, "nodes_expanded": 0, "nodes_until_opt": 0, "bound_prunes": 0}

    root = SubsetNode(0, 0, -1, problem.value_of_mask(0), bounds.ub(0, 0, -1))
    best_mask, best_val = None, NEG_INF
    history = []
    if problem.size_ok(0):
        best_mask, best_val = 0, root.lb
        history.append((0, root.lb))
        stats["nodes_until_opt"] = 1

    seq = 0
    frontier: list = []

    def push(node):
        nonlocal seq
        seq += 1
        if strategy == "dfs":
            frontier.append(node)
        else:
            heapq.heappush(frontier, (-node.ub, seq, node))

    def pop():
        return frontier.pop() if strategy == "dfs" else heapq.heappop(frontier)[2]

    push(root)
    timed_out = False
    while frontier:
        if stats["nodes_generated"] > node_budget or (
            deadline is not None and time.monotonic() > deadline
        ):
            timed_out = True
            break
        node = pop()
        if node.ub <= best_val:
            stats["bound_prunes"] += 1
            continue
        stats["nodes_expanded"] += 1
        if trace is not None:
            trace.append((tuple(indices_of(node.mask)), node.lb, node.ub))
        if k is not None and node.size >= k:
            continue
        if child_order == "index":
            order = list(range(node.top + 1, problem.n))
        else:
            order = order_children(problem, node.mask, node.size, node.top, bounds)
        children = []
        improved = False
        for i in order:
            cmask = node.mask | (1 << i)
            csize = node.size + 1
            val = problem.value_of_mask(cmask)
            stats["nodes_generated"] += 1
            if problem.size_ok(csize) and val > best_val:
                best_mask, best_val = cmask, val
                history.append((stats["nodes_generated"], val))
                stats["nodes_until_opt"] = stats["nodes_generated"]
                improved = True
            ub = bounds.ub(cmask, csize, i)
            if ub > best_val:
                children.append(SubsetNode(cmask, csize, i, val, ub))
        children = [c for c in children if c.ub > best_val]
        if strategy == "dfs":
            for c in reversed(children):
                push(c)
        else:
            for c in children:
                push(c)
        if improved and eager_prune:
            if strategy == "dfs":
                frontier[:] = [c for c in frontier if c.ub > best_val]
            else:
                frontier[:] = [e for e in frontier if e[2].ub > best_val]
                heapq.heapify(frontier)

    stats["wall_ms"] = (time.perf_counter() - t0) * 1000.0
    stats["incumbent_history"] = history
    if best_mask is None:
        why = "no subset of the required size exists" if not timed_out else "budget exhausted before any feasible subset"
        res = infeasible_result(problem, engine, stats, why)
        res.timed_out = timed_out
        return res
    return SearchResult(
        frozenset(indices_of(best_mask)),
        problem.assignment_of_mask(best_mask),
        best_val,
        proven_optimal=not timed_out,
        timed_out=timed_out,
        stats=stats,
        engine=engine,
    )
