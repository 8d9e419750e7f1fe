"""Render ASTs back to SQL text.

:class:`Renderer` produces canonical VectorSQL; ``parse(render(q)) == q`` for
every AST the parser can produce. Backend renderers in
:mod:`vectorsql.sql.transpile` subclass it and override the vector hooks.
"""

from __future__ import annotations

import re
from typing import Any

from .. import ast as A
from ..model import Metric
from .lexer import KEYWORDS

_BARE_IDENT = re.compile(r"^[a-z_][a-z0-9_]*$")

# Binding strength; children weaker than their context get parenthesized.
_PREC_OR, _PREC_AND, _PREC_NOT, _PREC_CMP, _PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_ATOM = range(1, 9)
_BINARY_PREC = {
    "OR": _PREC_OR,
    "AND": _PREC_AND,
    "=": _PREC_CMP,
    "!=": _PREC_CMP,
    "<": _PREC_CMP,
    "<=": _PREC_CMP,
    ">": _PREC_CMP,
    ">=": _PREC_CMP,
    "+": _PREC_ADD,
    "-": _PREC_ADD,
    "*": _PREC_MUL,
    "/": _PREC_MUL,
    "%": _PREC_MUL,
}


def quote_ident(name: str) -> str:
    if _BARE_IDENT.match(name) and name.upper() not in KEYWORDS:
        return name
    return '"' + name.replace('"', '""') + '"'


def quote_string(value: str) -> str:
    return "'" + value.replace("'", "''") + "'"


def format_number(value: Any) -> str:
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers")
    if isinstance(value, int):
        return str(value)
    text = repr(float(value))
    return text


def precedence(expr: Any) -> int:
    if isinstance(expr, A.BinaryOp):
        return _BINARY_PREC[expr.op]
    if isinstance(expr, A.UnaryOp):
        return _PREC_NOT if expr.op == "NOT" else _PREC_UNARY
    if isinstance(expr, (A.InList, A.InSubquery, A.Between, A.Like, A.IsNull)):
        return _PREC_CMP
    return _PREC_ATOM


class Renderer:
    """Canonical VectorSQL renderer."""

    def render(self, query: A.Select) -> str:
        return self.select(query)

    # -- hooks ---------------------------------------------------------

    def vector_target(self, clause: A.VectorClause) -> str:
        target = clause.target
        if isinstance(target, A.Param):
            return self.param(target)
        if isinstance(target, A.EmbedText):
            text = target.text
            inner = self.param(text) if isinstance(text, A.Param) else quote_string(text)
            return f"EMBED({inner})"
        return "[" + ", ".join(format_number(v) for v in target.values) + "]"

    def vector_order(self, select: A.Select) -> str:
        clause = select.vector
        assert clause is not None
        metric = "" if clause.metric is Metric.L2 else f", {clause.metric.name}"
        return f"DISTANCE({self.column(clause.column)}, {self.vector_target(clause)}{metric})"

    def vector_tail(self, select: A.Select) -> list[str]:
        """ORDER BY / LIMIT fragments for a SELECT carrying a vector clause."""
        clause = select.vector
        assert clause is not None
        return [f"ORDER BY {self.vector_order(select)}", f"LIMIT {self.limit_value(clause.k)}"]

    def where_clause(self, select: A.Select) -> str | None:
        if select.where is None:
            return None
        return self.expr(select.where)

    def param(self, param: A.Param) -> str:
        return f"${param.index}"

    def literal(self, lit: A.Literal) -> str:
        v = lit.value
        if v is None:
            return "NULL"
        if isinstance(v, bool):
            return "TRUE" if v else "FALSE"
        if isinstance(v, str):
            return quote_string(v)
        return format_number(v)

    # -- statements ----------------------------------------------------

    def select(self, q: A.Select) -> str:
        parts: list[str] = []
        if q.ctes:
            ctes = ", ".join(f"{quote_ident(c.name)} AS ({self.select(c.query)})" for c in q.ctes)
            parts.append(f"WITH {ctes}")
        head = "SELECT DISTINCT" if q.distinct else "SELECT"
        parts.append(head + " " + ", ".join(self.select_item(i) for i in q.items))
        if q.from_ is not None:
            parts.append("FROM " + self.from_clause(q.from_))
        where = self.where_clause(q)
        if where is not None:
            parts.append("WHERE " + where)
        if q.group_by:
            parts.append("GROUP BY " + ", ".join(self.expr(e) for e in q.group_by))
        if q.having is not None:
            parts.append("HAVING " + self.expr(q.having))
        if q.vector is not None:
            parts.extend(self.vector_tail(q))
        else:
            if q.order_by:
                parts.append("ORDER BY " + ", ".join(self.order_item(o) for o in q.order_by))
            if q.limit is not None:
                parts.append(f"LIMIT {self.limit_value(q.limit)}")
        return " ".join(parts)

    def limit_value(self, value: Any) -> str:
        if isinstance(value, A.Param):
            return self.param(value)
        return str(value)

    def order_item(self, item: A.OrderItem) -> str:
        text = self.expr(item.expr)
        return text + " DESC" if item.descending else text

    def select_item(self, item: A.SelectItem) -> str:
        text = self.expr(item.expr)
        if item.alias is not None:
            text += " AS " + quote_ident(item.alias)
        return text

    def from_clause(self, f: A.FromClause) -> str:
        text = self.source(f.source)
        for j in f.joins:
            kw = "LEFT JOIN" if j.kind == "LEFT" else "JOIN"
            text += f" {kw} {self.source(j.source)} ON {self.expr(j.on)}"
        return text

    def source(self, src: A.Source) -> str:
        if isinstance(src, A.TableRef):
            text = quote_ident(src.name)
            if src.alias is not None:
                text += " AS " + quote_ident(src.alias)
            return text
        return f"({self.select(src.query)}) AS {quote_ident(src.alias)}"

    # -- expressions ---------------------------------------------------

    def column(self, ref: A.ColumnRef) -> str:
        if ref.table is None:
            return quote_ident(ref.name)
        return f"{quote_ident(ref.table)}.{quote_ident(ref.name)}"

    def wrap(self, expr: Any, minimum: int) -> str:
        text = self.expr(expr)
        return f"({text})" if precedence(expr) < minimum else text

    def expr(self, e: Any) -> str:
        if isinstance(e, A.Literal):
            return self.literal(e)
        if isinstance(e, A.Param):
            return self.param(e)
        if isinstance(e, A.ColumnRef):
            return self.column(e)
        if isinstance(e, A.Star):
            return "*" if e.table is None else f"{quote_ident(e.table)}.*"
        if isinstance(e, A.BinaryOp):
            prec = _BINARY_PREC[e.op]
            if prec == _PREC_CMP:
                left = self.wrap(e.left, _PREC_ADD)
                right = self.wrap(e.right, _PREC_ADD)
            else:
                left = self.wrap(e.left, prec)
                right = self.wrap(e.right, prec + 1)
            return f"{left} {e.op} {right}"
        if isinstance(e, A.UnaryOp):
            if e.op == "NOT":
                return "NOT " + self.wrap(e.operand, _PREC_NOT)
            operand = e.operand
            # "-5" would re-parse as a negative literal; keep the unary node explicit.
            if isinstance(operand, A.Literal) and isinstance(operand.value, (int, float)):
                return f"-({self.expr(operand)})"
            inner = self.wrap(operand, _PREC_UNARY)
            if inner.startswith("-"):
                inner = f"({inner})"
            return "-" + inner
        if isinstance(e, A.FuncCall):
            args = ", ".join(self.expr(a) for a in e.args)
            if e.distinct:
                args = "DISTINCT " + args
            return f"{e.name}({args})"
        if isinstance(e, A.InList):
            kw = "NOT IN" if e.negated else "IN"
            items = ", ".join(self.expr(i) for i in e.items)
            return f"{self.wrap(e.expr, _PREC_ADD)} {kw} ({items})"
        if isinstance(e, A.InSubquery):
            kw = "NOT IN" if e.negated else "IN"
            return f"{self.wrap(e.expr, _PREC_ADD)} {kw} ({self.select(e.query)})"
        if isinstance(e, A.Between):
            kw = "NOT BETWEEN" if e.negated else "BETWEEN"
            return f"{self.wrap(e.expr, _PREC_ADD)} {kw} {self.wrap(e.low, _PREC_ADD)} AND {self.wrap(e.high, _PREC_ADD)}"
        if isinstance(e, A.Like):
            kw = "NOT LIKE" if e.negated else "LIKE"
            return f"{self.wrap(e.expr, _PREC_ADD)} {kw} {self.wrap(e.pattern, _PREC_ADD)}"
        if isinstance(e, A.IsNull):
            kw = "IS NOT NULL" if e.negated else "IS NULL"
            return f"{self.wrap(e.expr, _PREC_ADD)} {kw}"
        raise TypeError(f"cannot render {type(e).__name__}")


_CANONICAL = Renderer()


def render(query: A.Select) -> str:
    """Render a query as canonical VectorSQL (single line)."""
    return _CANONICAL.render(query)


def render_expr(expr: Any) -> str:
    return _CANONICAL.expr(expr)
