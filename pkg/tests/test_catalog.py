import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prefset.catalog import (
    TRUE, And, Atom, Catalog, CatalogError, FormulaError, Item, Not, Or, connective_count,
    dump_catalog_csv, eval_formula, format_formula, has_negation, load_catalog, make_schema,
    parse_formula,
)

SCHEMA = make_schema([("Color", ["red", "green", "blue"]), ("Size", (0, 9))])


def test_senators_formula_masks(senators):
    f = parse_formula("Party = Republican | View = conservative", senators.schema)
    assert senators.satisfiers(f) == [0, 1, 2]
    assert senators.satisfiers(parse_formula("View = liberal", senators.schema)) == [3]
    assert senators.mask(TRUE) == 0b1111


def test_parse_precedence_and_keywords():
    f = parse_formula("Color = red | Color = blue & !Size >= 5", SCHEMA)
    assert isinstance(f, Or) and isinstance(f.right, And) and isinstance(f.right.right, Not)
    assert connective_count(f) == 3
    assert has_negation(f)
    assert parse_formula("true", SCHEMA) is TRUE


@pytest.mark.parametrize("text", ["Shape = round", "Color = purple", "Color =", "(Color = red", "Size = x"])
def test_parse_rejects(text):
    with pytest.raises(FormulaError):
        parse_formula(text, SCHEMA)


def test_csv_roundtrip_and_errors():
    cat = Catalog(SCHEMA, [Item("a", {"Color": "red", "Size": 3}), Item("b", {"Color": "blue", "Size": 9})])
    text = dump_catalog_csv(cat)
    back = load_catalog(text, "csv", SCHEMA)
    assert [it.values for it in back.items] == [it.values for it in cat.items]
    with pytest.raises(CatalogError, match="row 2"):
        load_catalog("id,Color,Size\na,red\n", "csv", SCHEMA)
    with pytest.raises(CatalogError):
        load_catalog("id,Color,Size\na,red,12\n", "csv", SCHEMA)
    with pytest.raises(CatalogError, match="duplicate"):
        load_catalog("id,Color,Size\na,red,1\na,red,2\n", "csv", SCHEMA)


def test_json_roundtrip_keeps_schema():
    cat = Catalog(SCHEMA, [Item("a", {"Color": "green", "Size": 0})])
    back = load_catalog(json.dumps(cat.to_json()), "json")
    assert back.schema == SCHEMA
    assert back.items[0].values == {"Color": "green", "Size": 0}


atoms = st.one_of(
    st.builds(lambda c, r: Atom("Color", r, c), st.sampled_from(["red", "green", "blue"]), st.sampled_from(["=", "!="])),
    st.builds(lambda v, r: Atom("Size", r, v), st.integers(0, 9), st.sampled_from(["=", "!=", "<", "<=", ">", ">="])),
)
formulas = st.recursive(
    atoms,
    lambda sub: st.one_of(st.builds(Not, sub), st.builds(And, sub, sub), st.builds(Or, sub, sub)),
    max_leaves=6,
)
items = st.lists(
    st.builds(lambda c, s: {"Color": c, "Size": s}, st.sampled_from(["red", "green", "blue"]), st.integers(0, 9)),
    max_size=12,
)


@settings(max_examples=200, deadline=None)
@given(formulas)
def test_format_parse_roundtrip(f):
    assert parse_formula(format_formula(f), SCHEMA) == f


@settings(max_examples=200, deadline=None)
@given(formulas, items)
def test_mask_agrees_with_item_evaluation(f, rows):
    cat = Catalog(SCHEMA, [Item(f"o{i}", r) for i, r in enumerate(rows)])
    m = cat.mask(f)
    for i, it in enumerate(cat.items):
        assert bool(m >> i & 1) == eval_formula(f, it)
