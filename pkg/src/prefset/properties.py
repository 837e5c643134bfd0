"""Set properties: count-based predicates and counters over item subsets."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

from .catalog import (
    TRUE,
    AttributeSchema,
    Catalog,
    Formula,
    Item,
    compare,
    connective_count,
    count_satisfying,
    eval_formula,
    format_formula,
    normalize_rel,
    parse_formula,
)
from .csp_core import CardinalityConstraint

COUNT_VS_CONST = "count_vs_const"
COUNT_VS_COUNT = "count_vs_count"
COUNTER = "counter"
KINDS = (COUNT_VS_CONST, COUNT_VS_COUNT, COUNTER)

NEGATED = {"=": "!=", "!=": "=", "<": ">=", ">=": "<", "<=": ">", ">": "<="}

PropertyValue = Union[bool, int]
PropertyAssignment = dict  # property id -> PropertyValue


@dataclass(frozen=True)
class SetProperty:
    id: str
    kind: str
    phi: Formula
    rel: str | None = None
    k: int | None = None
    psi: Formula | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"property {self.id!r}: unknown kind {self.kind!r}")
        if self.kind == COUNT_VS_CONST:
            if self.k is None or self.k < 0:
                raise ValueError(f"property {self.id!r}: k must be a non-negative integer")
        if self.kind == COUNT_VS_COUNT and self.psi is None:
            raise ValueError(f"property {self.id!r}: count_vs_count needs psi")
        if self.kind != COUNTER:
            if self.rel is None:
                raise ValueError(f"property {self.id!r}: missing relation")
            object.__setattr__(self, "rel", normalize_rel(self.rel))

    @property
    def is_boolean(self) -> bool:
        return self.kind != COUNTER

    @property
    def formulas(self) -> tuple[Formula, ...]:
        return (self.phi, self.psi) if self.kind == COUNT_VS_COUNT else (self.phi,)

    @property
    def connectives(self) -> int:
        return max(connective_count(f) for f in self.formulas)

    def domain(self, n_items: int) -> tuple:
        return (True, False) if self.is_boolean else tuple(range(n_items + 1))

    def value_from_counts(self, c_phi: int, c_psi: int = 0) -> PropertyValue:
        if self.kind == COUNT_VS_CONST:
            return compare(c_phi, self.rel, self.k)
        if self.kind == COUNT_VS_COUNT:
            return compare(c_phi, self.rel, c_psi)
        return c_phi

    def describe(self) -> str:
        if self.kind == COUNT_VS_CONST:
            return f"<|{format_formula(self.phi)}| {self.rel} {self.k}>"
        if self.kind == COUNT_VS_COUNT:
            return f"<|{format_formula(self.phi)}| {self.rel} |{format_formula(self.psi)}|>"
        return f"|{format_formula(self.phi)}|"

    def to_json(self) -> dict:
        out = {"id": self.id, "kind": self.kind, "phi": format_formula(self.phi)}
        if self.kind == COUNT_VS_CONST:
            out.update(rel=self.rel, k=self.k)
        elif self.kind == COUNT_VS_COUNT:
            out.update(rel=self.rel, psi=format_formula(self.psi))
        return out


def count_vs_const(pid: str, phi: Formula, rel: str, k: int) -> SetProperty:
    return SetProperty(pid, COUNT_VS_CONST, phi, rel, k)


def count_vs_count(pid: str, phi: Formula, rel: str, psi: Formula) -> SetProperty:
    return SetProperty(pid, COUNT_VS_COUNT, phi, rel, psi=psi)


def counter(pid: str, phi: Formula = TRUE) -> SetProperty:
    return SetProperty(pid, COUNTER, phi)


def eval_property(p: SetProperty, subset: Iterable[Item]) -> PropertyValue:
    subset = list(subset)
    c_psi = count_satisfying(p.psi, subset) if p.kind == COUNT_VS_COUNT else 0
    return p.value_from_counts(count_satisfying(p.phi, subset), c_psi)


def eval_on_mask(p: SetProperty, catalog: Catalog, mask: int) -> PropertyValue:
    """Property value of the subset encoded as a bitmask over catalog indices."""
    c_phi = (catalog.mask(p.phi) & mask).bit_count()
    c_psi = (catalog.mask(p.psi) & mask).bit_count() if p.kind == COUNT_VS_COUNT else 0
    return p.value_from_counts(c_phi, c_psi)


def eval_all(props: Sequence[SetProperty], catalog: Catalog, indices: Iterable[int]) -> dict:
    mask = 0
    for i in indices:
        mask |= 1 << i
    return {p.id: eval_on_mask(p, catalog, mask) for p in props}


# ---------------------------------------------------------------------------
# reachability


def _truths(base: int, lo: int, hi: int, step: int, rel: str) -> set[bool]:
    """Truth values of ``compare(base + d, rel, 0)`` for d in range(lo, hi + 1, step)."""
    out = set()
    if lo > hi:
        return out
    for r, want in ((rel, True), (NEGATED[rel], False)):
        a, b = base + lo, base + hi
        if r == "=":
            ok = a <= 0 <= b and (-a) % step == 0
        elif r == "!=":
            ok = b > a or a != 0
        elif r == "<":
            ok = a < 0
        elif r == "<=":
            ok = a <= 0
        elif r == ">":
            ok = b > 0
        else:
            ok = b >= 0
        if ok:
            out.add(want)
    return out


def _addition_range(r: int, others: int, add_exactly: int | None) -> tuple[int, int]:
    """Range of how many of ``r`` satisfiers can be added, given ``others`` non-satisfiers."""
    if add_exactly is None:
        return 0, r
    return max(0, add_exactly - others), min(r, add_exactly)


def reachable_values(
    p: SetProperty,
    current: Iterable[Item],
    remaining: Iterable[Item],
    add_exactly: int | None = None,
) -> set:
    """Values of ``p`` achievable by ``current ∪ E`` for some ``E ⊆ remaining``.

    ``add_exactly`` restricts ``|E|`` (used when a cardinality target is in force).
    """
    current = list(current)
    remaining = list(remaining)
    if add_exactly is not None and not 0 <= add_exactly <= len(remaining):
        return set()
    if p.kind == COUNT_VS_COUNT:
        both = phi_only = psi_only = neither = 0
        for o in remaining:
            a, b = eval_formula(p.phi, o), eval_formula(p.psi, o)
            if a and b:
                both += 1
            elif a:
                phi_only += 1
            elif b:
                psi_only += 1
            else:
                neither += 1
        base = count_satisfying(p.phi, current) - count_satisfying(p.psi, current)
        return _count_vs_count_reach(p.rel, base, both, phi_only, psi_only, neither, add_exactly)
    c = count_satisfying(p.phi, current)
    r = count_satisfying(p.phi, remaining)
    tmin, tmax = _addition_range(r, len(remaining) - r, add_exactly)
    if tmin > tmax:
        return set()
    if p.kind == COUNTER:
        return set(range(c + tmin, c + tmax + 1))
    return _truths(c - p.k, tmin, tmax, 1, p.rel)


def _count_vs_count_reach(rel, base, both, phi_only, psi_only, neither, add_exactly):
    # only (#phi-only added) - (#psi-only added) moves the difference
    out: set[bool] = set()
    free = both + neither
    if add_exactly is None:
        s_range = range(0, phi_only + psi_only + 1)
    else:
        s_range = range(max(0, add_exactly - free), min(phi_only + psi_only, add_exactly) + 1)
    for s in s_range:
        xc_lo, xc_hi = max(0, s - phi_only), min(psi_only, s)
        if xc_lo > xc_hi:
            continue
        # d = s - 2*xc, xc in [xc_lo, xc_hi]
        out |= _truths(base, s - 2 * xc_hi, s - 2 * xc_lo, 2, rel)
        if len(out) == 2:
            break
    return out


def reachable_from_masks(
    p: SetProperty, catalog: Catalog, current: int, remaining: int, add_exactly: int | None = None
) -> set:
    """Bitmask form of :func:`reachable_values` (no Item lists built)."""
    n_rem = remaining.bit_count()
    if add_exactly is not None and not 0 <= add_exactly <= n_rem:
        return set()
    mphi = catalog.mask(p.phi)
    if p.kind == COUNT_VS_COUNT:
        mpsi = catalog.mask(p.psi)
        both = (remaining & mphi & mpsi).bit_count()
        phi_only = (remaining & mphi & ~mpsi).bit_count()
        psi_only = (remaining & mpsi & ~mphi).bit_count()
        neither = n_rem - both - phi_only - psi_only
        base = (current & mphi).bit_count() - (current & mpsi).bit_count()
        return _count_vs_count_reach(p.rel, base, both, phi_only, psi_only, neither, add_exactly)
    c = (current & mphi).bit_count()
    r = (remaining & mphi).bit_count()
    tmin, tmax = _addition_range(r, n_rem - r, add_exactly)
    if tmin > tmax:
        return set()
    if p.kind == COUNTER:
        return set(range(c + tmin, c + tmax + 1))
    return _truths(c - p.k, tmin, tmax, 1, p.rel)


# ---------------------------------------------------------------------------
# translation to cardinality constraints


def _normalize_strict(rel: str, bound: int) -> tuple[str, int]:
    if rel == "<":
        return "<=", bound - 1
    if rel == ">":
        return ">=", bound + 1
    return rel, bound


def constraint_id(p: SetProperty, v: PropertyValue) -> str:
    if not p.is_boolean:
        return f"{p.id}={v}"
    return p.id if v else f"!{p.id}"


def property_to_constraints(
    p: SetProperty, v: PropertyValue, catalog: Catalog
) -> list[CardinalityConstraint]:
    """Constraints over item-selection variables that hold iff ``p`` takes value ``v``.

    A zero-scope constraint that holds trivially is dropped; one that can never hold is
    kept (empty scope) so solvers report UNSAT at once.
    """
    cid = constraint_id(p, v)
    if p.kind == COUNTER:
        if isinstance(v, bool) or not isinstance(v, int) or v < 0:
            raise ValueError(f"counter {p.id!r} takes integer values, got {v!r}")
        coefs = {i: 1 for i in catalog.satisfiers(p.phi)}
        rel, bound = "=", v
    else:
        if not isinstance(v, bool):
            raise ValueError(f"property {p.id!r} takes boolean values, got {v!r}")
        rel = p.rel if v else NEGATED[p.rel]
        if p.kind == COUNT_VS_CONST:
            coefs = {i: 1 for i in catalog.satisfiers(p.phi)}
            bound = p.k
        else:
            phi, psi = catalog.mask(p.phi), catalog.mask(p.psi)
            coefs = {}
            for i in range(len(catalog)):
                c = (phi >> i & 1) - (psi >> i & 1)
                if c:
                    coefs[i] = c
            bound = 0
        rel, bound = _normalize_strict(rel, bound)
    con = CardinalityConstraint(cid, coefs, rel, bound)
    if not coefs and con.holds(0):
        return []
    return [con]


# ---------------------------------------------------------------------------
# offline conflict resolution


@dataclass(frozen=True)
class ConflictEntry:
    first: str
    second: str
    kind: str  # "subsumption" | "equivalent" | "exclusive" | "compatible"
    redundant: str | None = None
    forced: tuple[str, bool] | None = None


@dataclass
class ConflictReport:
    entries: list[ConflictEntry] = field(default_factory=list)

    def by_kind(self, kind: str) -> list[ConflictEntry]:
        return [e for e in self.entries if e.kind == kind]


def allowed_counts(rel: str, k: int, upto: int) -> set[int]:
    return {c for c in range(upto + 1) if compare(c, rel, k)}


def classify_pair(a: SetProperty, b: SetProperty) -> ConflictEntry:
    upto = max(a.k, b.k) + 2
    sa, sb = allowed_counts(a.rel, a.k, upto), allowed_counts(b.rel, b.k, upto)
    if not sa & sb:
        return ConflictEntry(a.id, b.id, "exclusive", forced=(b.id, False))
    if sa == sb:
        return ConflictEntry(a.id, b.id, "equivalent", redundant=b.id)
    if sb <= sa:
        return ConflictEntry(a.id, b.id, "subsumption", redundant=a.id)
    if sa <= sb:
        return ConflictEntry(a.id, b.id, "subsumption", redundant=b.id)
    return ConflictEntry(a.id, b.id, "compatible")


def resolve_offline_conflicts(props: Sequence[SetProperty]) -> ConflictReport:
    """Compare every pair of count-vs-constant properties over the same formula text.

    In a subsumption entry ``redundant`` names the property implied by the other; in an
    exclusive entry ``forced`` names the later property, which must be false when the
    earlier one holds.
    """
    report = ConflictReport()
    cands = [p for p in props if p.kind == COUNT_VS_CONST]
    for a, b in itertools.combinations(cands, 2):
        if format_formula(a.phi) == format_formula(b.phi):
            report.entries.append(classify_pair(a, b))
    return report


# ---------------------------------------------------------------------------
# JSON


def property_from_json(data: Mapping, schema: AttributeSchema) -> SetProperty:
    kind = data.get("kind", COUNT_VS_CONST)
    phi = parse_formula(str(data.get("phi", "true")), schema)
    if kind == COUNTER:
        return counter(data["id"], phi)
    if kind == COUNT_VS_COUNT:
        return count_vs_count(data["id"], phi, data["rel"], parse_formula(data["psi"], schema))
    return count_vs_const(data["id"], phi, data["rel"], int(data["k"]))


def load_properties(source, schema: AttributeSchema) -> list[SetProperty]:
    if hasattr(source, "read"):
        source = source.read()
    data = json.loads(source) if isinstance(source, (str, bytes)) else source
    if isinstance(data, dict):
        data = data.get("properties", [data])
    props = [property_from_json(d, schema) for d in data]
    ids = [p.id for p in props]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate property ids")
    return props


def dump_properties(props: Sequence[SetProperty]) -> str:
    return json.dumps([p.to_json() for p in props], indent=2)
