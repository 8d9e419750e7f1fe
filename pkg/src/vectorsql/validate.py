"""Static checks of a query against a hybrid schema."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional

from . import ast as A
from .errors import ResolutionError
from .model import HybridSchema, ScalarType
from .scope import (
    Env,
    Scope,
    build_scope,
    comparable,
    extend_env,
    infer_type,
    output_shape,
    substitute_aliases,
)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    node: Any = None
    pos: Optional[tuple[int, int]] = None

    def __str__(self) -> str:
        where = f" at line {self.pos[0]}, column {self.pos[1]}" if self.pos else ""
        return f"{self.code}: {self.message}{where}"


def _diag(code: str, message: str, node: Any) -> Diagnostic:
    return Diagnostic(code, message, node, getattr(node, "pos", None))


def validate_query(query: A.Select, schema: HybridSchema) -> list[Diagnostic]:
    """Every violated invariant as a diagnostic; empty when the query is valid."""
    v = _Validator(schema)
    v.level(query, {})
    out: list[Diagnostic] = []
    seen: set[tuple] = set()
    for d in v.diags:
        key = (d.code, d.message, d.pos)
        if key not in seen:
            seen.add(key)
            out.append(d)
    return out


class _Validator:
    def __init__(self, schema: HybridSchema) -> None:
        self.schema = schema
        self.diags: list[Diagnostic] = []

    def add(self, code: str, message: str, node: Any) -> None:
        self.diags.append(_diag(code, message, node))

    def add_errors(self, errors: list[ResolutionError]) -> None:
        for e in errors:
            self.add(e.code, e.message, e.node)

    def level(self, select: A.Select, env: Env) -> None:
        errors: list[ResolutionError] = []
        names = [c.name for c in select.ctes]
        for i, name in enumerate(names):
            if name in names[:i]:
                self.add("duplicate-cte", f"duplicate CTE name {name!r}", select)
        cte_env = dict(env)
        for cte in select.ctes:
            self.level(cte.query, cte_env)
            cte_env = extend_env(A.Select(items=(), ctes=(cte,)), self.schema, cte_env, [])
        env2 = extend_env(select, self.schema, env, [])
        scope = build_scope(select, self.schema, env2, errors)
        self.add_errors(errors)

        if select.from_ is not None:
            for src in select.from_.sources:
                if isinstance(src, A.SubqueryRef):
                    self.level(src.query, env2)
            for i, join in enumerate(select.from_.joins):
                partial = Scope(scope.sources[: i + 2])
                self.expr(join.on, partial, env2, allow_agg=False)

        grouped = select.is_grouped
        aliases = {it.alias: it.expr for it in select.items if it.alias}

        for item in select.items:
            if isinstance(item.expr, A.Star):
                try:
                    scope.star(item.expr.table)
                except ResolutionError as err:
                    self.add(err.code, err.message, item.expr)
                if grouped:
                    self.add("ungrouped-column", "'*' cannot be selected in a grouped query", item.expr)
                continue
            self.expr(item.expr, scope, env2, allow_agg=True)
        if select.where is not None:
            self.expr(select.where, scope, env2, allow_agg=False)
        for g in select.group_by:
            self.expr(g, scope, env2, allow_agg=False)
        if select.having is not None:
            having = substitute_aliases(select.having, aliases, scope, prefer_alias=False)
            self.expr(having, scope, env2, allow_agg=True)
        order_exprs = []
        for o in select.order_by:
            e = substitute_aliases(o.expr, aliases, scope, prefer_alias=True)
            order_exprs.append(e)
            self.expr(e, scope, env2, allow_agg=grouped)
        if grouped:
            checks = [it.expr for it in select.items if not isinstance(it.expr, A.Star)]
            if select.having is not None:
                checks.append(substitute_aliases(select.having, aliases, scope, prefer_alias=False))
            checks += order_exprs
            slots = set()
            for g in select.group_by:
                if isinstance(g, A.ColumnRef):
                    try:
                        slots.add(scope.resolve(g).index)
                    except ResolutionError:
                        pass
            for e in checks:
                self.grouping(e, select.group_by, scope, slots)

        if isinstance(select.limit, A.Param):
            self.add("unbound-parameter", "LIMIT is an unbound parameter", select)
        elif select.limit is not None and select.limit < 0:
            self.add("limit-range", "LIMIT must be >= 0", select)
        if select.vector is not None:
            self.vector(select.vector, scope)

    def vector(self, clause: A.VectorClause, scope: Scope) -> None:
        if isinstance(clause.k, A.Param):
            self.add("unbound-parameter", "k is an unbound parameter", clause)
        elif clause.k < 1:
            self.add("k-range", f"k must be >= 1 (got {clause.k})", clause)
        target = clause.target
        if isinstance(target, A.Param) or (isinstance(target, A.EmbedText) and isinstance(target.text, A.Param)):
            self.add("unbound-parameter", "vector target is an unbound parameter", clause)
        try:
            src_index, vc = scope.resolve_vector(clause.column)
        except ResolutionError as err:
            self.add(err.code, err.message, clause.column)
            return
        src = scope.sources[src_index]
        if src.nullable:
            self.add(
                "nullable-vector",
                f"vector column {vc.name!r} is on the nullable side of a LEFT JOIN",
                clause.column,
            )
        if vc.metric is not clause.metric:
            self.add(
                "metric-mismatch",
                f"column {vc.name!r} is indexed for {vc.metric.value}, clause uses {clause.metric.value}",
                clause,
            )
        if isinstance(target, A.VectorLiteral) and len(target.values) != vc.dim:
            self.add("dim-mismatch", f"vector literal has dim {len(target.values)}, column has {vc.dim}", clause)

    def grouping(self, expr: Any, group_by: tuple[A.Expr, ...], scope: Scope, slots: set[int]) -> None:
        if any(expr == g for g in group_by):
            return
        if isinstance(expr, A.FuncCall) and expr.is_aggregate:
            return
        if isinstance(expr, A.ColumnRef):
            try:
                if scope.resolve(expr).index in slots:
                    return
            except ResolutionError:
                return
            self.add("ungrouped-column", f"column {expr.name!r} must appear in GROUP BY or an aggregate", expr)
            return
        if isinstance(expr, A.InSubquery):
            self.grouping(expr.expr, group_by, scope, slots)
            return
        for child in A.child_nodes(expr):
            self.grouping(child, group_by, scope, slots)

    def expr(self, expr: A.Expr, scope: Scope, env: Env, allow_agg: bool, in_agg: bool = False) -> None:
        if isinstance(expr, A.ColumnRef):
            try:
                scope.resolve(expr)
            except ResolutionError as err:
                self.add(err.code, err.message, expr)
            return
        if isinstance(expr, A.Param):
            self.add("unbound-parameter", f"parameter ${expr.index} is unbound", expr)
            return
        if isinstance(expr, A.Star):
            return
        if isinstance(expr, A.InSubquery):
            self.expr(expr.expr, scope, env, allow_agg, in_agg)
            self.level(expr.query, env)
            errs: list[ResolutionError] = []
            shape = output_shape(expr.query, self.schema, env, errs)
            if shape is not None and not errs and len(shape.columns) != 1:
                self.add("subquery-columns", "IN subquery must select exactly one column", expr)
            elif shape is not None and not errs:
                self.compare(expr, infer_type(expr.expr, scope) if self.resolvable(expr.expr, scope) else None, shape.types[0])
            return
        if isinstance(expr, A.FuncCall):
            self.func(expr, scope, env, allow_agg, in_agg)
            return
        for child in A.child_nodes(expr):
            self.expr(child, scope, env, allow_agg, in_agg)
        if not self.resolvable(expr, scope):
            return
        if isinstance(expr, A.BinaryOp):
            lt, rt = infer_type(expr.left, scope), infer_type(expr.right, scope)
            if expr.op in ("+", "-", "*", "/", "%"):
                if ScalarType.TEXT in (lt, rt):
                    self.add("type-mismatch", f"arithmetic '{expr.op}' on text", expr)
            elif expr.op not in ("AND", "OR"):
                self.compare(expr, lt, rt)
        elif isinstance(expr, A.UnaryOp) and expr.op == "-":
            if infer_type(expr.operand, scope) is ScalarType.TEXT:
                self.add("type-mismatch", "unary minus on text", expr)
        elif isinstance(expr, A.InList):
            t = infer_type(expr.expr, scope)
            for item in expr.items:
                self.compare(expr, t, infer_type(item, scope))
        elif isinstance(expr, A.Between):
            t = infer_type(expr.expr, scope)
            self.compare(expr, t, infer_type(expr.low, scope))
            self.compare(expr, t, infer_type(expr.high, scope))
        elif isinstance(expr, A.Like):
            for side in (expr.expr, expr.pattern):
                t = infer_type(side, scope)
                if t is not None and t is not ScalarType.TEXT:
                    self.add("type-mismatch", "LIKE requires text operands", expr)
                    break

    def func(self, f: A.FuncCall, scope: Scope, env: Env, allow_agg: bool, in_agg: bool) -> None:
        if f.is_aggregate:
            if not allow_agg:
                self.add("aggregate-misuse", f"aggregate {f.name} is not allowed here", f)
            if in_agg:
                self.add("nested-aggregate", f"aggregate {f.name} cannot be nested", f)
            if len(f.args) != 1:
                self.add("function-arity", f"{f.name} takes exactly one argument", f)
        else:
            lo, hi = A.SCALAR_FUNCTIONS[f.name]
            if not lo <= len(f.args) <= hi:
                self.add("function-arity", f"{f.name} takes {lo}..{hi} arguments, got {len(f.args)}", f)
            if f.distinct:
                self.add("function-arity", f"DISTINCT is only valid inside aggregates", f)
        for a in f.args:
            self.expr(a, scope, env, allow_agg, in_agg or f.is_aggregate)
        if not self.resolvable(f, scope):
            return
        arg_types = [infer_type(a, scope) for a in f.args if not isinstance(a, A.Star)]
        if f.name in ("SUM", "AVG", "ABS", "ROUND") and arg_types and arg_types[0] is ScalarType.TEXT:
            self.add("type-mismatch", f"{f.name} requires a numeric argument", f)
        if f.name in ("LOWER", "UPPER", "LENGTH") and arg_types and arg_types[0] not in (None, ScalarType.TEXT):
            self.add("type-mismatch", f"{f.name} requires a text argument", f)
        if f.name == "ROUND" and len(arg_types) == 2 and arg_types[1] not in (None, ScalarType.INTEGER):
            self.add("type-mismatch", "ROUND digits must be an integer", f)

    def compare(self, node: Any, a: Any, b: Any) -> None:
        if not comparable(a, b):
            self.add("type-mismatch", f"cannot compare {a.value} with {b.value}", node)

    @staticmethod
    def resolvable(expr: Any, scope: Scope) -> bool:
        for node in A.walk_expr(expr):
            if isinstance(node, A.ColumnRef):
                try:
                    scope.resolve(node)
                except ResolutionError:
                    return False
        return True
