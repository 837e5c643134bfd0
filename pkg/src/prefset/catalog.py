"""Attribute schemas, items, catalogs and the item-formula language.

Formulas are small immutable ASTs over attribute atoms::

    formula := or
    or      := and ("|" and)*
    and     := not ("&" not)*
    not     := "!" not | "(" formula ")" | atom | "true"
    atom    := IDENT REL value

``REL`` is one of ``= != < <= > >=``. Categorical attributes only accept
``=`` and ``!=``. Values are identifiers, integers or double-quoted strings.
"""
from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, Union

RELATIONS = ("=", "!=", "<", "<=", ">", ">=")

# ASCII and unicode spellings accepted on input; output is always ASCII.
_REL_ALIASES = {"≠": "!=", "≤": "<=", "≥": ">=", "==": "="}


class CatalogError(ValueError):
    """Schema violation, malformed record or duplicate id."""


class FormulaError(ValueError):
    """Syntax or typing error in a formula. ``position`` is a character offset or None."""

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


def compare(left: int, rel: str, right: int) -> bool:
    if rel == "=":
        return left == right
    if rel == "!=":
        return left != right
    if rel == "<":
        return left < right
    if rel == "<=":
        return left <= right
    if rel == ">":
        return left > right
    if rel == ">=":
        return left >= right
    raise ValueError(f"unknown relation {rel!r}")


def normalize_rel(rel: str) -> str:
    rel = _REL_ALIASES.get(rel, rel)
    if rel not in RELATIONS:
        raise ValueError(f"unknown relation {rel!r}")
    return rel


# ---------------------------------------------------------------------------
# schema / items


@dataclass(frozen=True)
class Attribute:
    name: str
    kind: str  # "categorical" | "integer"
    domain: tuple[str, ...] = ()
    lo: int | None = None
    hi: int | None = None

    def __post_init__(self):
        if self.kind not in ("categorical", "integer"):
            raise CatalogError(f"attribute {self.name!r}: unknown kind {self.kind!r}")
        if not _IDENT_RE.fullmatch(self.name) or self.name == "true":
            raise CatalogError(f"attribute name {self.name!r} is not an identifier")
        if self.kind == "categorical":
            if not self.domain:
                raise CatalogError(f"attribute {self.name!r}: empty domain")
            if len(set(self.domain)) != len(self.domain):
                raise CatalogError(f"attribute {self.name!r}: duplicate domain values")
        elif self.lo is not None and self.hi is not None and self.lo > self.hi:
            raise CatalogError(f"attribute {self.name!r}: empty range [{self.lo}..{self.hi}]")

    def admits(self, value) -> bool:
        if self.kind == "categorical":
            return isinstance(value, str) and value in self.domain
        if isinstance(value, bool) or not isinstance(value, int):
            return False
        if self.lo is not None and value < self.lo:
            return False
        if self.hi is not None and value > self.hi:
            return False
        return True

    def to_json(self) -> dict:
        if self.kind == "categorical":
            return {"name": self.name, "kind": "categorical", "domain": list(self.domain)}
        out = {"name": self.name, "kind": "integer"}
        if self.lo is not None or self.hi is not None:
            out["range"] = [self.lo, self.hi]
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "Attribute":
        kind = data.get("kind", "categorical")
        if kind == "categorical":
            return cls(data["name"], kind, tuple(str(v) for v in data.get("domain", ())))
        lo, hi = (data.get("range") or [None, None])
        return cls(data["name"], kind, lo=lo, hi=hi)


@dataclass(frozen=True)
class AttributeSchema:
    attributes: tuple[Attribute, ...]

    def __post_init__(self):
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise CatalogError("attribute names must be unique")
        object.__setattr__(self, "_by_name", {a.name: a for a in self.attributes})

    def __getitem__(self, name: str) -> Attribute:
        return self._by_name[name]

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    @property
    def names(self) -> list[str]:
        return [a.name for a in self.attributes]

    def to_json(self) -> dict:
        return {"attributes": [a.to_json() for a in self.attributes]}

    @classmethod
    def from_json(cls, data: Mapping) -> "AttributeSchema":
        return cls(tuple(Attribute.from_json(a) for a in data["attributes"]))


@dataclass(frozen=True)
class Item:
    id: str
    values: Mapping[str, Union[str, int]]

    def __getitem__(self, attr: str):
        return self.values[attr]

    def __hash__(self):
        return hash(self.id)


def validate_item(item: Item, schema: AttributeSchema) -> None:
    extra = set(item.values) - set(schema.names)
    if extra:
        raise CatalogError(f"item {item.id!r}: unknown attributes {sorted(extra)}")
    for attr in schema.attributes:
        if attr.name not in item.values:
            raise CatalogError(f"item {item.id!r}: missing value for {attr.name!r}")
        if not attr.admits(item.values[attr.name]):
            raise CatalogError(
                f"item {item.id!r}: value {item.values[attr.name]!r} outside domain of {attr.name!r}"
            )


class Catalog:
    """The pool of available items. Item order is the canonical index used by every solver."""

    def __init__(self, schema: AttributeSchema, items: Iterable[Item]):
        self.schema = schema
        self.items: tuple[Item, ...] = tuple(items)
        seen = set()
        for it in self.items:
            if it.id in seen:
                raise CatalogError(f"duplicate item id {it.id!r}")
            seen.add(it.id)
            validate_item(it, schema)
        self._index = {it.id: i for i, it in enumerate(self.items)}
        self._masks: dict[Formula, int] = {}

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def index_of(self, item_id: str) -> int:
        return self._index[item_id]

    def ids(self, indices: Iterable[int]) -> list[str]:
        return [self.items[i].id for i in sorted(indices)]

    def mask(self, f: "Formula") -> int:
        """Bitmask of the items satisfying ``f`` (bit i = item i)."""
        m = self._masks.get(f)
        if m is None:
            m = 0
            for i, it in enumerate(self.items):
                if eval_formula(f, it):
                    m |= 1 << i
            self._masks[f] = m
        return m

    def satisfiers(self, f: "Formula") -> list[int]:
        m = self.mask(f)
        return [i for i in range(len(self.items)) if m >> i & 1]

    def to_json(self) -> dict:
        return {
            "schema": self.schema.to_json(),
            "items": [{"id": it.id, "values": dict(it.values)} for it in self.items],
        }


# ---------------------------------------------------------------------------
# formula AST


@dataclass(frozen=True)
class TrueF:
    pass


@dataclass(frozen=True)
class Atom:
    attr: str
    rel: str
    value: Union[str, int]


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


Formula = Union[TrueF, Atom, Not, And, Or]
TRUE = TrueF()


def connective_count(f: Formula) -> int:
    if isinstance(f, (TrueF, Atom)):
        return 0
    if isinstance(f, Not):
        return 1 + connective_count(f.arg)
    return 1 + connective_count(f.left) + connective_count(f.right)


def atoms(f: Formula) -> list[Atom]:
    if isinstance(f, Atom):
        return [f]
    if isinstance(f, TrueF):
        return []
    if isinstance(f, Not):
        return atoms(f.arg)
    return atoms(f.left) + atoms(f.right)


def has_negation(f: Formula) -> bool:
    if isinstance(f, Not):
        return True
    if isinstance(f, (And, Or)):
        return has_negation(f.left) or has_negation(f.right)
    if isinstance(f, Atom):
        return f.rel == "!="
    return False


def eval_formula(f: Formula, o: Item) -> bool:
    if isinstance(f, Atom):
        return compare(o.values[f.attr], f.rel, f.value)
    if isinstance(f, TrueF):
        return True
    if isinstance(f, Not):
        return not eval_formula(f.arg, o)
    if isinstance(f, And):
        return eval_formula(f.left, o) and eval_formula(f.right, o)
    return eval_formula(f.left, o) or eval_formula(f.right, o)


def count_satisfying(f: Formula, subset: Iterable[Item]) -> int:
    return sum(1 for o in subset if eval_formula(f, o))


# ---------------------------------------------------------------------------
# printer

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*")
_PREC = {Or: 1, And: 2}


def _format_value(v) -> str:
    if isinstance(v, int):
        return str(v)
    if _IDENT_RE.fullmatch(v) and v != "true":
        return v
    return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'


def format_formula(f: Formula) -> str:
    """Canonical text; ``parse_formula(format_formula(f))`` rebuilds ``f``."""
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, Atom):
        return f"{f.attr} {f.rel} {_format_value(f.value)}"
    if isinstance(f, Not):
        inner = format_formula(f.arg)
        if isinstance(f.arg, (And, Or, Atom)):
            inner = f"({inner})"
        return "!" + inner
    prec = _PREC[type(f)]
    op = " | " if isinstance(f, Or) else " & "
    left = format_formula(f.left)
    if isinstance(f.left, (And, Or)) and _PREC[type(f.left)] < prec:
        left = f"({left})"
    right = format_formula(f.right)
    # operators are parsed left-associatively, so a same-precedence right child needs parens
    if isinstance(f.right, (And, Or)) and _PREC[type(f.right)] <= prec:
        right = f"({right})"
    return left + op + right


# ---------------------------------------------------------------------------
# parser

_TOKEN_RE = re.compile(
    r"""\s*(?:
        (?P<str>"(?:[^"\\]|\\.)*")
      | (?P<int>-?\d+(?![A-Za-z_]))
      | (?P<ident>[A-Za-z_][A-Za-z0-9_\-]*)
      | (?P<rel>!=|<=|>=|==|=|<|>|≠|≤|≥)
      | (?P<op>[&|!()])
    )""",
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise FormulaError(f"unexpected character {text[start]!r}", start)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, schema: AttributeSchema):
        self.toks = _tokenize(text)
        self.i = 0
        self.schema = schema

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self.parse_or()
        kind, text, pos = self.peek()
        if kind != "eof":
            raise FormulaError(f"unexpected token {text!r}", pos)
        return f

    def parse_or(self) -> Formula:
        f = self.parse_and()
        while self.peek()[:2] == ("op", "|"):
            self.take()
            f = Or(f, self.parse_and())
        return f

    def parse_and(self) -> Formula:
        f = self.parse_not()
        while self.peek()[:2] == ("op", "&"):
            self.take()
            f = And(f, self.parse_not())
        return f

    def parse_not(self) -> Formula:
        kind, text, pos = self.peek()
        if (kind, text) == ("op", "!"):
            self.take()
            return Not(self.parse_not())
        if (kind, text) == ("op", "("):
            self.take()
            f = self.parse_or()
            kind, text, pos = self.take()
            if (kind, text) != ("op", ")"):
                raise FormulaError("expected ')'", pos)
            return f
        if kind == "ident" and text == "true":
            self.take()
            return TRUE
        if kind == "ident":
            return self.parse_atom()
        if kind == "eof":
            raise FormulaError("unexpected end of formula", pos)
        raise FormulaError(f"unexpected token {text!r}", pos)

    def parse_atom(self) -> Atom:
        _, name, pos = self.take()
        if name not in self.schema:
            raise FormulaError(f"unknown attribute {name!r}", pos)
        attr = self.schema[name]
        kind, rel, rpos = self.take()
        if kind != "rel":
            raise FormulaError("expected a comparison operator", rpos)
        rel = normalize_rel(rel)
        vkind, vtext, vpos = self.take()
        if vkind == "str":
            raw = re.sub(r"\\(.)", r"\1", vtext[1:-1])
        elif vkind in ("ident", "int"):
            raw = vtext
        else:
            raise FormulaError("expected a value", vpos)
        if attr.kind == "categorical":
            if rel not in ("=", "!="):
                raise FormulaError(f"operator {rel!r} not allowed on categorical {name!r}", rpos)
            if raw not in attr.domain:
                raise FormulaError(f"value {raw!r} outside domain of {name!r}", vpos)
            return Atom(name, rel, raw)
        if vkind != "int":
            raise FormulaError(f"integer attribute {name!r} compared with non-integer {raw!r}", vpos)
        return Atom(name, rel, int(raw))


def parse_formula(text: str, schema: AttributeSchema) -> Formula:
    if not text or not text.strip():
        raise FormulaError("empty formula", 0)
    return _Parser(text, schema).parse()


def check_formula(f: Formula, schema: AttributeSchema) -> None:
    """Type-check an AST built in code (parsed formulas are checked already)."""
    for a in atoms(f):
        if a.attr not in schema:
            raise FormulaError(f"unknown attribute {a.attr!r}")
        attr = schema[a.attr]
        if a.rel not in RELATIONS:
            raise FormulaError(f"unknown relation {a.rel!r}")
        if attr.kind == "categorical":
            if a.rel not in ("=", "!=") or a.value not in attr.domain:
                raise FormulaError(f"bad categorical atom {format_formula(a)!r}")
        elif isinstance(a.value, bool) or not isinstance(a.value, int):
            raise FormulaError(f"bad integer atom {format_formula(a)!r}")


# ---------------------------------------------------------------------------
# loading


def _coerce(attr: Attribute, raw, where: str):
    if attr.kind == "integer" and isinstance(raw, str):
        try:
            raw = int(raw.strip())
        except ValueError:
            raise CatalogError(f"{where}: {attr.name!r} expects an integer, got {raw!r}") from None
    if not attr.admits(raw):
        raise CatalogError(f"{where}: value {raw!r} outside domain of {attr.name!r}")
    return raw


def load_catalog(source, fmt: str = "csv", schema: AttributeSchema | None = None) -> Catalog:
    """Read a catalog from a byte/text stream or string.

    CSV needs ``schema``; JSON falls back to its embedded schema.
    """
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if fmt == "json":
        try:
            data = json.loads(source)
        except json.JSONDecodeError as e:
            raise CatalogError(f"malformed JSON at line {e.lineno}: {e.msg}") from None
        if schema is None:
            if "schema" not in data:
                raise CatalogError("JSON catalog without schema")
            schema = AttributeSchema.from_json(data["schema"])
        items = []
        for n, rec in enumerate(data.get("items", []), 1):
            if "id" not in rec or not isinstance(rec.get("values"), dict):
                raise CatalogError(f"item {n}: malformed record")
            vals = {}
            for k, v in rec["values"].items():
                if k not in schema:
                    raise CatalogError(f"item {n}: unknown attribute {k!r}")
                vals[k] = _coerce(schema[k], v, f"item {n}")
            items.append(Item(str(rec["id"]), vals))
        return Catalog(schema, items)
    if fmt != "csv":
        raise ValueError(f"unknown catalog format {fmt!r}")
    if schema is None:
        raise CatalogError("CSV catalogs need an explicit schema")
    reader = csv.reader(io.StringIO(source))
    rows = list(reader)
    if not rows:
        return Catalog(schema, [])
    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "id":
        raise CatalogError("row 1: header must start with 'id'")
    for h in header[1:]:
        if h not in schema:
            raise CatalogError(f"row 1: unknown attribute {h!r}")
    items = []
    for rownum, row in enumerate(rows[1:], 2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise CatalogError(f"row {rownum}: expected {len(header)} fields, got {len(row)}")
        vals = {h: _coerce(schema[h], c.strip(), f"row {rownum}") for h, c in zip(header[1:], row[1:])}
        try:
            items.append(Item(row[0].strip(), vals))
        except CatalogError as e:
            raise CatalogError(f"row {rownum}: {e}") from None
    try:
        return Catalog(schema, items)
    except CatalogError as e:
        raise CatalogError(str(e)) from None


def dump_catalog_csv(catalog: Catalog) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["id"] + catalog.schema.names)
    for it in catalog.items:
        w.writerow([it.id] + [it.values[a] for a in catalog.schema.names])
    return out.getvalue()


def make_schema(spec: Sequence[tuple]) -> AttributeSchema:
    """Shorthand: ``[("Party", ["R", "D"]), ("Year", (1900, 2010))]``; a list is a categorical
    domain, a 2-tuple an integer range."""
    attrs = []
    for name, dom in spec:
        if isinstance(dom, tuple):
            attrs.append(Attribute(name, "integer", lo=dom[0], hi=dom[1]))
        else:
            attrs.append(Attribute(name, "categorical", tuple(dom)))
    return AttributeSchema(tuple(attrs))
