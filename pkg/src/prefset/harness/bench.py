"""Run several engine variants over a list of instances and tabulate the outcome.

Each (instance, variant) cell gets fresh solver state. A run that hits its budget is
shown as "—" in the table. Subset engines always maximize the value function; CSP
variants follow the model's own kind unless a mode is forced, so values are only
compared among runs that optimize the same target.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from ..csp_search import VARIANTS, solve_csp_bnb, variant_config
from ..problem import Problem
from ..subset_search import solve_subset_bnb

TIMEOUT_MARK = "—"
SUBSET_VARIANTS = ("subset-dfs", "subset-bfs")
ALL_VARIANTS = SUBSET_VARIANTS + tuple(VARIANTS)


@dataclass
class BenchRow:
    instance: str
    variant: str
    target: str  # "gai" (value maximization) or "tcp" (conditional-lexicographic optimum)
    value: float | None
    seconds: float
    timed_out: bool
    work: int  # subsets generated, or CSPs solved
    backtracks: int  # item-level backtracks (CSP variants only)
    stats: dict = field(default_factory=dict)

    def cells(self) -> list[str]:
        value = TIMEOUT_MARK if self.timed_out else ("UNSAT" if self.value is None else f"{self.value:g}")
        secs = TIMEOUT_MARK if self.timed_out else f"{self.seconds:.3f}"
        return [self.instance, self.variant, self.target, value, secs, str(self.work), str(self.backtracks)]


@dataclass
class BenchReport:
    rows: list = field(default_factory=list)
    budget: float | None = None

    HEADER = ["instance", "variant", "target", "value", "time_s", "work", "backtracks"]

    def mismatches(self) -> list[str]:
        """Instances on which completed runs with the same target disagree."""
        seen: dict = {}
        bad = []
        for r in self.rows:
            if r.timed_out:
                continue
            key = (r.instance, r.target)
            if key in seen and seen[key][1] != r.value:
                bad.append(f"{r.instance}: {seen[key][0]}={seen[key][1]} vs {r.variant}={r.value}")
            seen.setdefault(key, (r.variant, r.value))
        return bad

    @property
    def consistent(self) -> bool:
        return not self.mismatches()

    def to_tsv(self) -> str:
        lines = ["\t".join(self.HEADER)]
        lines += ["\t".join(r.cells()) for r in self.rows]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        out = []
        for r in self.rows:
            out.append({
                "instance": r.instance, "variant": r.variant, "target": r.target,
                "value": TIMEOUT_MARK if r.timed_out else r.value,
                "seconds": r.seconds, "timed_out": r.timed_out,
                "work": r.work, "backtracks": r.backtracks,
            })
        return json.dumps({"budget": self.budget, "rows": out, "consistent": self.consistent}, indent=2)


def run_cell(name: str, problem: Problem, variant: str, budget: float | None, mode: str | None = None) -> BenchRow:
    t0 = time.perf_counter()
    if variant in SUBSET_VARIANTS:
        res = solve_subset_bnb(problem, strategy=variant.split("-")[1], node_budget=10**12, timeout=budget)
        target = "gai"
        work = res.stats.get("nodes_generated", 0)
        backtracks = 0
    elif variant in VARIANTS:
        res = solve_csp_bnb(problem, variant_config(variant, mode=mode, timeout=budget))
        target = mode or problem.model.kind
        work = res.stats.get("csps_solved", 0)
        backtracks = res.stats.get("item_backtracks", 0)
    else:
        raise ValueError(f"unknown variant {variant!r}; choose from {', '.join(ALL_VARIANTS)}")
    secs = time.perf_counter() - t0
    value = res.value if res.proven_optimal or res.timed_out else None
    return BenchRow(name, variant, target, value, secs, res.timed_out, work, backtracks, dict(res.stats))


def run_benchmark(instances, variants=ALL_VARIANTS, budget: float | None = 60.0,
                  mode: str | None = None, strict: bool = False) -> BenchReport:
    """``instances`` is a list of (name, Problem). With ``strict`` a value mismatch raises."""
    report = BenchReport(budget=budget)
    for name, problem in instances:
        for v in variants:
            report.rows.append(run_cell(name, problem, v, budget, mode))
    if strict and not report.consistent:
        raise AssertionError("; ".join(report.mismatches()))
    return report
