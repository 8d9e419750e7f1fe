"""AST for the canonical VectorSQL dialect.

Nodes are frozen dataclasses; sequences are tuples so that structural
equality (``==``) is the round-trip identity used throughout the tests.
Source positions are carried in ``pos`` but excluded from comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, is_dataclass, replace
from typing import Any, Iterator, Optional, Union

from .model import Metric

Pos = Optional[tuple[int, int]]

AGGREGATES = frozenset({"COUNT", "SUM", "AVG", "MIN", "MAX"})
SCALAR_FUNCTIONS = {
    "LOWER": (1, 1),
    "UPPER": (1, 1),
    "LENGTH": (1, 1),
    "ABS": (1, 1),
    "ROUND": (1, 2),
    "COALESCE": (1, 16),
}


def _pos() -> Any:
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True, eq=False)
class Literal:
    value: Any
    pos: Pos = _pos()

    # TRUE == 1 == 1.0 in Python; literals of different SQL types must differ.
    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Literal):
            return NotImplemented
        return type(self.value) is type(other.value) and self.value == other.value

    def __hash__(self) -> int:
        return hash((type(self.value).__name__, self.value))


@dataclass(frozen=True)
class Param:
    """Positional placeholder produced by templating (``$1``, ``$2`` ...)."""

    index: int
    pos: Pos = _pos()


@dataclass(frozen=True)
class ColumnRef:
    table: Optional[str]
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Star:
    table: Optional[str] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class UnaryOp:
    op: str
    operand: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class FuncCall:
    name: str
    args: tuple["Expr", ...]
    distinct: bool = False
    pos: Pos = _pos()

    @property
    def is_aggregate(self) -> bool:
        return self.name in AGGREGATES


@dataclass(frozen=True)
class InList:
    expr: "Expr"
    items: tuple["Expr", ...]
    negated: bool = False
    pos: Pos = _pos()


@dataclass(frozen=True)
class InSubquery:
    expr: "Expr"
    query: "Select"
    negated: bool = False
    pos: Pos = _pos()


@dataclass(frozen=True)
class Between:
    expr: "Expr"
    low: "Expr"
    high: "Expr"
    negated: bool = False
    pos: Pos = _pos()


@dataclass(frozen=True)
class Like:
    expr: "Expr"
    pattern: "Expr"
    negated: bool = False
    pos: Pos = _pos()


@dataclass(frozen=True)
class IsNull:
    expr: "Expr"
    negated: bool = False
    pos: Pos = _pos()


Expr = Union[Literal, Param, ColumnRef, Star, BinaryOp, UnaryOp, FuncCall, InList, InSubquery, Between, Like, IsNull]


@dataclass(frozen=True)
class SelectItem:
    expr: Expr
    alias: Optional[str] = None


@dataclass(frozen=True)
class TableRef:
    name: str
    alias: Optional[str] = None
    pos: Pos = _pos()

    @property
    def binding(self) -> str:
        return self.alias or self.name


@dataclass(frozen=True)
class SubqueryRef:
    query: "Select"
    alias: str
    pos: Pos = _pos()

    @property
    def binding(self) -> str:
        return self.alias


Source = Union[TableRef, SubqueryRef]


@dataclass(frozen=True)
class Join:
    kind: str  # "INNER" or "LEFT"
    source: Source
    on: Expr


@dataclass(frozen=True)
class FromClause:
    source: Source
    joins: tuple[Join, ...] = ()

    @property
    def sources(self) -> tuple[Source, ...]:
        return (self.source,) + tuple(j.source for j in self.joins)


@dataclass(frozen=True)
class EmbedText:
    text: Union[str, Param]


@dataclass(frozen=True)
class VectorLiteral:
    values: tuple[float, ...]


@dataclass(frozen=True)
class VectorClause:
    column: ColumnRef
    target: Union[EmbedText, VectorLiteral, Param]
    metric: Metric = Metric.L2
    k: Union[int, Param] = 1
    pos: Pos = _pos()


@dataclass(frozen=True)
class OrderItem:
    expr: Expr
    descending: bool = False


@dataclass(frozen=True)
class CTE:
    name: str
    query: "Select"


@dataclass(frozen=True)
class Select:
    items: tuple[SelectItem, ...]
    from_: Optional[FromClause] = None
    where: Optional[Expr] = None
    group_by: tuple[Expr, ...] = ()
    having: Optional[Expr] = None
    order_by: tuple[OrderItem, ...] = ()
    vector: Optional[VectorClause] = None
    limit: Union[int, Param, None] = None
    distinct: bool = False
    ctes: tuple[CTE, ...] = ()
    pos: Pos = _pos()

    @property
    def is_grouped(self) -> bool:
        if self.group_by or self.having is not None:
            return True
        return any(contains_aggregate(item.expr) for item in self.items)


# A top-level query is a SELECT statement.
VectorSqlQuery = Select


def child_nodes(node: Any) -> Iterator[Any]:
    """Yield direct dataclass children of an AST node (flattening tuples)."""
    for f in fields(node):
        if f.name == "pos":
            continue
        value = getattr(node, f.name)
        if is_dataclass(value):
            yield value
        elif isinstance(value, tuple):
            for item in value:
                if is_dataclass(item):
                    yield item


def walk(node: Any) -> Iterator[Any]:
    """Pre-order traversal over every node, descending into subqueries."""
    yield node
    for child in child_nodes(node):
        yield from walk(child)


def walk_expr(expr: Any) -> Iterator[Any]:
    """Pre-order traversal of an expression that stops at subquery boundaries."""
    yield expr
    if isinstance(expr, InSubquery):
        yield from walk_expr(expr.expr)
        return
    for child in child_nodes(expr):
        yield from walk_expr(child)


def contains_aggregate(expr: Any) -> bool:
    return any(isinstance(n, FuncCall) and n.is_aggregate for n in walk_expr(expr))


@dataclass(frozen=True)
class SelectContext:
    select: Select
    depth: int
    kind: str  # "top", "cte", "from", "in"


def iter_selects(query: Select, depth: int = 0, kind: str = "top") -> Iterator[SelectContext]:
    """Yield every SELECT level in the query with its nesting depth."""
    yield SelectContext(query, depth, kind)
    for cte in query.ctes:
        yield from iter_selects(cte.query, depth + 1, "cte")
    if query.from_ is not None:
        for src in query.from_.sources:
            if isinstance(src, SubqueryRef):
                yield from iter_selects(src.query, depth + 1, "from")
    for sub in _expr_subqueries(query):
        yield from iter_selects(sub, depth + 1, "in")


def _expr_subqueries(query: Select) -> Iterator[Select]:
    roots: list[Any] = [item.expr for item in query.items]
    if query.from_ is not None:
        roots += [j.on for j in query.from_.joins]
    roots += [query.where, query.having]
    roots += list(query.group_by)
    roots += [o.expr for o in query.order_by]
    for root in roots:
        if root is None:
            continue
        for node in walk_expr(root):
            if isinstance(node, InSubquery):
                yield node.query


def vector_clauses(query: Select) -> list[VectorClause]:
    return [ctx.select.vector for ctx in iter_selects(query) if ctx.select.vector is not None]


def embed_texts(query: Select) -> list[str]:
    out = []
    for clause in vector_clauses(query):
        if isinstance(clause.target, EmbedText) and isinstance(clause.target.text, str):
            out.append(clause.target.text)
    return out


def strip_positions(node: Any) -> Any:
    """Return a copy of ``node`` with every ``pos`` cleared (for hashing/printing)."""
    if not is_dataclass(node):
        if isinstance(node, tuple):
            return tuple(strip_positions(x) for x in node)
        return node
    changes = {}
    for f in fields(node):
        value = getattr(node, f.name)
        if f.name == "pos":
            if value is not None:
                changes["pos"] = None
            continue
        new = strip_positions(value)
        if new is not value:
            changes[f.name] = new
    return replace(node, **changes) if changes else node
