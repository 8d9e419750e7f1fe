"""Literal-free query templates used for deduplication."""

from __future__ import annotations

from dataclasses import replace
from typing import Any, Callable

from .. import ast as A
from .render import render

LiteralFn = Callable[[Any], Any]


def map_query(q: A.Select, fn: LiteralFn) -> A.Select:
    """Rebuild ``q`` calling ``fn`` on every templatable value in text order.

    ``fn`` receives literal nodes, LIMIT/k integers, EMBED payloads and
    vector literals, and returns their replacement.
    """
    ctes = tuple(A.CTE(c.name, map_query(c.query, fn)) for c in q.ctes)
    items = tuple(A.SelectItem(_map_expr(i.expr, fn), i.alias) for i in q.items)
    from_ = None
    if q.from_ is not None:
        src = _map_source(q.from_.source, fn)
        joins = tuple(A.Join(j.kind, _map_source(j.source, fn), _map_expr(j.on, fn)) for j in q.from_.joins)
        from_ = A.FromClause(src, joins)
    where = _map_expr(q.where, fn)
    group_by = tuple(_map_expr(e, fn) for e in q.group_by)
    having = _map_expr(q.having, fn)
    vector = q.vector
    order_by = q.order_by
    limit = q.limit
    if vector is not None:
        target = vector.target
        if isinstance(target, A.EmbedText):
            target = A.EmbedText(fn(target.text))
        else:
            target = fn(target)
        k = fn(vector.k)
        vector = A.VectorClause(vector.column, target, vector.metric, k, pos=vector.pos)
    else:
        order_by = tuple(A.OrderItem(_map_expr(o.expr, fn), o.descending) for o in q.order_by)
        if limit is not None:
            limit = fn(limit)
    return replace(
        q,
        ctes=ctes,
        items=items,
        from_=from_,
        where=where,
        group_by=group_by,
        having=having,
        vector=vector,
        order_by=order_by,
        limit=limit,
    )


def _map_source(src: A.Source, fn: LiteralFn) -> A.Source:
    if isinstance(src, A.SubqueryRef):
        return A.SubqueryRef(map_query(src.query, fn), src.alias, pos=src.pos)
    return src


def _map_expr(e: Any, fn: LiteralFn) -> Any:
    if e is None:
        return None
    if isinstance(e, (A.Literal, A.Param)):
        return fn(e)
    if isinstance(e, (A.ColumnRef, A.Star)):
        return e
    if isinstance(e, A.BinaryOp):
        left = _map_expr(e.left, fn)
        return A.BinaryOp(e.op, left, _map_expr(e.right, fn))
    if isinstance(e, A.UnaryOp):
        return A.UnaryOp(e.op, _map_expr(e.operand, fn))
    if isinstance(e, A.FuncCall):
        return A.FuncCall(e.name, tuple(_map_expr(a, fn) for a in e.args), e.distinct)
    if isinstance(e, A.InList):
        left = _map_expr(e.expr, fn)
        return A.InList(left, tuple(_map_expr(i, fn) for i in e.items), e.negated)
    if isinstance(e, A.InSubquery):
        left = _map_expr(e.expr, fn)
        return A.InSubquery(left, map_query(e.query, fn), e.negated)
    if isinstance(e, A.Between):
        left = _map_expr(e.expr, fn)
        low = _map_expr(e.low, fn)
        return A.Between(left, low, _map_expr(e.high, fn), e.negated)
    if isinstance(e, A.Like):
        left = _map_expr(e.expr, fn)
        return A.Like(left, _map_expr(e.pattern, fn), e.negated)
    if isinstance(e, A.IsNull):
        return A.IsNull(_map_expr(e.expr, fn), e.negated)
    raise TypeError(f"unexpected node {type(e).__name__}")


def templatize(query: A.Select) -> A.Select:
    counter = 0

    def replace_value(value: Any) -> Any:
        nonlocal counter
        if isinstance(value, A.Literal):
            if value.value is None or isinstance(value.value, bool):
                return value
        counter += 1
        return A.Param(counter)

    return map_query(query, replace_value)


def canonical_template(query: A.Select) -> str:
    """Canonical text with string/number literals, k values and EMBED payloads
    replaced by ``$1, $2, ...`` in order of appearance."""
    return render(templatize(query))
