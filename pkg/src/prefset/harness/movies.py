"""Synthetic film-festival catalog and the 14-property festival preference model.

The catalog is random but seeded; its attribute vocabulary follows the festival
setting (genre, year, colour, sound, director, location, cast fame, net profit). The
TCP-net is our reading of the organisers' verbal wishes; where a wish was ambiguous
the choice is noted next to the table entry.
"""
from __future__ import annotations

import random

from ..catalog import Catalog, Item, make_schema, parse_formula
from ..prefmodel import tcp_model
from ..problem import Problem
from ..properties import count_vs_const

GENRES = ["Drama", "Comedy", "Thriller", "Action", "Family", "Romance", "War", "Film-noir", "Documentary"]
GENRE_WEIGHTS = [25, 20, 15, 14, 8, 8, 4, 3, 3]
FESTIVAL_SIZE = 5


def movie_schema():
    return make_schema([
        ("Year", (1920, 2008)),
        ("Genre", GENRES),
        ("Color", ["Color", "BW"]),
        ("Sound", ["Mono", "Stereo", "Dolby"]),
        ("Director", ["Spielberg", "Other"]),
        ("Location", ["North_America", "Europe", "Asia", "Other"]),
        ("Actor", ["Famous", "Unknown"]),
        ("Actress", ["Famous", "Unknown"]),
        ("NetProfit", (-10_000_000, 500_000_000)),
    ])


def movie_catalog(n: int, seed: int = 0) -> Catalog:
    rng = random.Random(seed)
    schema = movie_schema()
    items = []
    for i in range(n):
        genre = rng.choices(GENRES, GENRE_WEIGHTS)[0]
        old = genre == "Film-noir" or rng.random() < 0.45
        year = rng.randint(1920, 1969) if old and rng.random() < 0.6 else rng.randint(1970 if old else 2002, 2001 if old else 2008)
        bw = year < 1960 and rng.random() < 0.8
        items.append(Item(f"m{i}", {
            "Year": year,
            "Genre": genre,
            "Color": "BW" if bw else "Color",
            "Sound": "Mono" if year < 1975 and rng.random() < 0.7 else rng.choice(["Stereo", "Dolby"]),
            "Director": "Spielberg" if rng.random() < 0.01 else "Other",
            "Location": rng.choices(["North_America", "Europe", "Asia", "Other"], [50, 30, 12, 8])[0],
            "Actor": "Famous" if rng.random() < 0.25 else "Unknown",
            "Actress": "Famous" if rng.random() < 0.2 else "Unknown",
            "NetProfit": rng.randint(-10_000_000, 200_000_000) if rng.random() < 0.6 else rng.randint(-10_000_000, 999_999),
        }))
    return Catalog(schema, items)


PROPERTY_TEXT = {
    "SP1": ("Year >= 2002", "=", 5),
    "SP2": ("Genre = Comedy", ">=", 2),
    "SP3": ("Genre = Thriller", "<=", 3),
    "SP4": ("Genre = Family", ">", 1),
    "SP5": ("Color = BW", ">", 1),
    "SP6": ("Director = Spielberg", ">=", 1),
    "SP7": ("Sound = Mono", ">=", 2),
    "SP8": ('Genre = War | Genre = "Film-noir"', "=", 0),
    "SP9": ("Location = North_America", ">", 1),
    "SP10": ("Actor = Famous | Actress = Famous", "=", 5),
    "SP11": ("Actress = Famous", ">=", 2),
    "SP12": ("Genre = Drama", ">=", 2),
    # a release-date attribute would duplicate Year, so the classic-film test uses Year
    "SP13": ("Year < 1970", "<=", 1),
    "SP14": ("NetProfit >= 1000000", ">=", 2),
}

ALTERED = {
    "SP6*": ("Director = Spielberg", "<=", 1),
    "SP8*": ('Genre = War | Genre = "Film-noir"', ">=", 4),
    "SP8**": ('Genre = "Film-noir"', ">=", 4),
    "SP14**": ("NetProfit >= 1000000", ">=", 5),
}

SUITES = {
    "P5": {},
    "P9": {},
    "P14": {},
    "P14'": {"SP6": "SP6*", "SP8": "SP8*"},
    "P14''": {"SP6": "SP6*", "SP8": "SP8**", "SP14": "SP14**"},
}
SUITE_SIZE = {"P5": 5, "P9": 9, "P14": 14, "P14'": 14, "P14''": 14}

T, F = True, False
# child -> list of (context, best-first order); plain tuples are unconditional
CP_TABLES = {
    "SP1": (T, F),  # new films
    "SP2": [({"SP1": T}, (T, F)), ({"SP1": F}, (F, T))],  # comedies wanted once all films are new
    "SP4": [({"SP2": T}, (T, F)), ({"SP2": F}, (F, T))],  # family films follow the comedy wish
    "SP3": [({"SP2": T}, (T, F)), ({"SP2": F}, (F, T))],  # few thrillers, again after comedies
    "SP5": [({"SP1": T}, (F, T)), ({"SP1": F}, (T, F))],  # B&W only for a vintage programme
    "SP6": [({"SP1": F}, (T, F)), ({"SP1": T}, (F, T))],  # Spielberg only if not all new
    "SP7": [({"SP6": T}, (T, F)), ({"SP6": F}, (F, T))],  # mono sound goes with the Spielberg wish
    "SP8": (T, F),  # no war films or film-noir
    "SP9": [({"SP8": T}, (T, F)), ({"SP8": F}, (F, T))],  # otherwise avoid North America
    "SP10": (T, F),
    "SP11": (T, F),
    "SP12": (T, F),
    "SP13": (T, F),
    "SP14": (T, F),
}
CP_ARCS = [("SP1", "SP2"), ("SP2", "SP4"), ("SP2", "SP3"), ("SP1", "SP5"), ("SP1", "SP6"),
           ("SP6", "SP7"), ("SP8", "SP9")]
I_ARCS = [("SP4", "SP3"), ("SP9", "SP5"), ("SP1", "SP8"), ("SP1", "SP10"), ("SP10", "SP11"),
          ("SP1", "SP12"), ("SP1", "SP13"), ("SP1", "SP14")]


def suite_properties(suite: str, schema) -> list:
    size = SUITE_SIZE[suite]
    swaps = SUITES[suite]
    props = []
    for j in range(1, size + 1):
        pid = f"SP{j}"
        text, rel, k = ALTERED[swaps[pid]] if pid in swaps else PROPERTY_TEXT[pid]
        props.append(count_vs_const(pid, parse_formula(text, schema), rel, k))
    return props


def festival_problem(suite: str = "P14", n: int = 3000, seed: int = 0, cardinality: int = FESTIVAL_SIZE) -> Problem:
    cat = movie_catalog(n, seed)
    props = suite_properties(suite, cat.schema)
    ids = {p.id for p in props}
    cp_arcs = [a for a in CP_ARCS if a[0] in ids and a[1] in ids]
    i_arcs = [a for a in I_ARCS if a[0] in ids and a[1] in ids]
    tables = {}
    for pid in ids:
        t = CP_TABLES[pid]
        if isinstance(t, list) and not any(a[1] == pid for a in cp_arcs):
            t = t[0][1]
        tables[pid] = t
    model = tcp_model(props, n, cp_arcs=cp_arcs, cp_tables=tables, i_arcs=i_arcs, cardinality=cardinality)
    return Problem(cat, props, model)
