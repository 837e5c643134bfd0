"""Small hand-built instances used by tests, the CLI and the benchmark."""
from __future__ import annotations

from ..catalog import Catalog, Item, make_schema, parse_formula
from ..prefmodel import gai_model, tcp_model
from ..problem import Problem
from ..properties import count_vs_const

SENATOR_ROWS = [
    ("o1", "Republican", "conservative", "inexperienced"),
    ("o2", "Republican", "ultra_conservative", "experienced"),
    ("o3", "Democrat", "conservative", "experienced"),
    ("o4", "Democrat", "liberal", "experienced"),
]


def senators_catalog() -> Catalog:
    schema = make_schema([
        ("Party", ["Republican", "Democrat"]),
        ("View", ["conservative", "ultra_conservative", "liberal"]),
        ("Experience", ["experienced", "inexperienced"]),
    ])
    items = [Item(i, {"Party": p, "View": v, "Experience": e}) for i, p, v, e in SENATOR_ROWS]
    return Catalog(schema, items)


def senators_properties(catalog: Catalog) -> list:
    s = catalog.schema
    return [
        count_vs_const("P1", parse_formula("Party = Republican | View = conservative", s), ">=", 2),
        count_vs_const("P2", parse_formula("Experience = experienced", s), ">=", 2),
        count_vs_const("P3", parse_formula("View = liberal", s), ">=", 1),
    ]


def senators_gai(cardinality: int | None = 3) -> Problem:
    cat = senators_catalog()
    props = senators_properties(cat)
    model = gai_model(props, len(cat), [
        (("P1", "P2"), {(True, True): 10, (True, False): 8, (False, True): 2, (False, False): 5}),
        (("P3",), {(True,): 1, (False,): 0}),
    ], cardinality=cardinality)
    return Problem(cat, props, model)


def senators_tcp(cardinality: int | None = 3) -> Problem:
    """P1 is a parent of P2 (P2 preferred iff P1 holds); both matter more than P3."""
    cat = senators_catalog()
    props = senators_properties(cat)
    model = tcp_model(
        props, len(cat),
        cp_arcs=[("P1", "P2")],
        cp_tables={"P1": (True, False),
                   "P2": [({"P1": True}, (True, False)), ({"P1": False}, (False, True))],
                   "P3": (True, False)},
        i_arcs=[("P1", "P3"), ("P2", "P3")],
        cardinality=cardinality,
    )
    return Problem(cat, props, model)
