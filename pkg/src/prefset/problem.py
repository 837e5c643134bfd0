"""A subset-selection problem instance and the result record every engine returns."""
from __future__ import annotations

from dataclasses import dataclass, field

from .catalog import Catalog
from .prefmodel import PreferenceModel, gai_value
from .properties import SetProperty, eval_on_mask


@dataclass
class Problem:
    catalog: Catalog
    props: list[SetProperty]
    model: PreferenceModel

    def __post_init__(self):
        self.by_id = {p.id: p for p in self.props}

    @property
    def n(self) -> int:
        return len(self.catalog)

    @property
    def cardinality(self) -> int | None:
        return self.model.cardinality

    def assignment_of_mask(self, mask: int) -> dict:
        return {p.id: eval_on_mask(p, self.catalog, mask) for p in self.props}

    def value_of_mask(self, mask: int) -> float:
        return gai_value(self.model.gai, self.assignment_of_mask(mask))

    def size_ok(self, size: int) -> bool:
        k = self.cardinality
        return k is None or size == k


def mask_of(indices) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def indices_of(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


@dataclass
class SearchResult:
    subset: frozenset  # item indices
    assignment: dict
    value: float
    proven_optimal: bool = True
    timed_out: bool = False
    stats: dict = field(default_factory=dict)
    diagnostic: str = ""
    engine: str = ""

    def item_ids(self, catalog: Catalog) -> list[str]:
        return catalog.ids(self.subset)

    def to_json(self, catalog: Catalog | None = None) -> dict:
        out = {
            "engine": self.engine,
            "value": self.value,
            "assignment": self.assignment,
            "witness": sorted(self.subset) if catalog is None else self.item_ids(catalog),
            "proven_optimal": self.proven_optimal,
            "timed_out": self.timed_out,
        }
        if self.diagnostic:
            out["diagnostic"] = self.diagnostic
        out.update(self.stats)
        return out


def infeasible_result(problem: Problem, engine: str, stats: dict, why: str) -> SearchResult:
    return SearchResult(frozenset(), problem.assignment_of_mask(0), problem.value_of_mask(0),
                        proven_optimal=False, stats=stats, diagnostic=why, engine=engine)
