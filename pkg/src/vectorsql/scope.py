"""Name resolution shared by the validator and the executor.

A SELECT level sees its FROM sources laid out left to right as one flat row;
:class:`Scope` maps column references to slots in that row. Visible CTEs are
passed down as an environment of output shapes.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, is_dataclass, replace
from typing import Any, Callable, Mapping, Optional

from . import ast as A
from .errors import ResolutionError
from .model import HybridSchema, ScalarType, TableDef, VectorColumnDef
from .sql.render import render_expr

_NUMERIC = (ScalarType.INTEGER, ScalarType.REAL, ScalarType.BOOLEAN)


@dataclass(frozen=True)
class Shape:
    columns: tuple[str, ...]
    types: tuple[Optional[ScalarType], ...]


@dataclass(frozen=True)
class SourceInfo:
    binding: str
    shape: Optional[Shape]  # None when the source itself failed to resolve
    node: A.Source
    table: Optional[TableDef] = None
    cte: Optional[str] = None
    nullable: bool = False


@dataclass(frozen=True)
class Slot:
    source: int
    column: int
    index: int
    type: Optional[ScalarType]


Env = Mapping[str, Shape]


class Scope:
    def __init__(self, sources: list[SourceInfo]) -> None:
        self.sources = sources
        self.offsets: list[int] = []
        width = 0
        for s in sources:
            self.offsets.append(width)
            width += len(s.shape.columns) if s.shape is not None else 0
        self.width = width

    def bindings(self) -> list[str]:
        return [s.binding for s in self.sources]

    def _candidates(self, ref: A.ColumnRef) -> list[int]:
        if ref.table is None:
            return list(range(len(self.sources)))
        hits = [i for i, s in enumerate(self.sources) if s.binding == ref.table]
        if not hits:
            raise ResolutionError(f"unknown table or alias {ref.table!r}", "unknown-table", ref)
        return hits

    def resolve(self, ref: A.ColumnRef) -> Slot:
        matches: list[Slot] = []
        opaque = False
        vector_hit = False
        for i in self._candidates(ref):
            src = self.sources[i]
            if src.shape is None:
                opaque = True
                continue
            for j, name in enumerate(src.shape.columns):
                if name == ref.name:
                    matches.append(Slot(i, j, self.offsets[i] + j, src.shape.types[j]))
            if src.table is not None and src.table.vector_column(ref.name) is not None:
                vector_hit = True
        if len(matches) == 1:
            return matches[0]
        if len(matches) > 1:
            raise ResolutionError(f"ambiguous column {ref.name!r}", "ambiguous-column", ref)
        if opaque:
            return Slot(-1, -1, -1, None)
        if vector_hit:
            raise ResolutionError(
                f"vector column {ref.name!r} can only be used in a DISTANCE ordering", "vector-as-scalar", ref
            )
        label = f"{ref.table}.{ref.name}" if ref.table else ref.name
        raise ResolutionError(f"unknown column {label!r}", "unknown-column", ref)

    def resolve_vector(self, ref: A.ColumnRef) -> tuple[int, VectorColumnDef]:
        matches: list[tuple[int, VectorColumnDef]] = []
        scalar_hit = False
        for i in self._candidates(ref):
            src = self.sources[i]
            if src.table is not None:
                vc = src.table.vector_column(ref.name)
                if vc is not None:
                    matches.append((i, vc))
                    continue
            if src.shape is not None and ref.name in src.shape.columns:
                scalar_hit = True
        if len(matches) == 1:
            return matches[0]
        if len(matches) > 1:
            raise ResolutionError(f"ambiguous vector column {ref.name!r}", "ambiguous-column", ref)
        if scalar_hit:
            raise ResolutionError(
                f"{ref.name!r} is not a vector column of a base table at this level", "not-vector-column", ref
            )
        raise ResolutionError(f"unknown vector column {ref.name!r}", "unknown-column", ref)

    def star(self, table: Optional[str]) -> list[tuple[str, Slot]]:
        idx = range(len(self.sources))
        if table is not None:
            idx = [i for i, s in enumerate(self.sources) if s.binding == table]
            if not idx:
                raise ResolutionError(f"unknown table or alias {table!r}", "unknown-table", None)
        out = []
        for i in idx:
            src = self.sources[i]
            if src.shape is None:
                continue
            for j, name in enumerate(src.shape.columns):
                out.append((name, Slot(i, j, self.offsets[i] + j, src.shape.types[j])))
        return out


def table_shape(table: TableDef) -> Shape:
    return Shape(tuple(c.name for c in table.columns), tuple(c.type for c in table.columns))


def source_info(
    src: A.Source,
    schema: HybridSchema,
    env: Env,
    nullable: bool,
    errors: Optional[list[ResolutionError]] = None,
) -> SourceInfo:
    if isinstance(src, A.SubqueryRef):
        shape = output_shape(src.query, schema, env, errors)
        return SourceInfo(src.alias, shape, src, nullable=nullable)
    if src.name in env:
        return SourceInfo(src.binding, env[src.name], src, cte=src.name, nullable=nullable)
    table = schema.table(src.name)
    if table is None:
        err = ResolutionError(f"unknown table {src.name!r}", "unknown-table", src)
        if errors is None:
            raise err
        errors.append(err)
        return SourceInfo(src.binding, None, src, nullable=nullable)
    return SourceInfo(src.binding, table_shape(table), src, table=table, nullable=nullable)


def build_scope(
    select: A.Select,
    schema: HybridSchema,
    env: Env,
    errors: Optional[list[ResolutionError]] = None,
) -> Scope:
    """Scope of ``select``'s FROM clause; ``env`` must already include its CTEs."""
    sources: list[SourceInfo] = []
    if select.from_ is not None:
        sources.append(source_info(select.from_.source, schema, env, False, errors))
        for j in select.from_.joins:
            sources.append(source_info(j.source, schema, env, j.kind == "LEFT", errors))
    seen: set[str] = set()
    for s in sources:
        if s.binding in seen:
            err = ResolutionError(f"duplicate table binding {s.binding!r}", "duplicate-binding", s.node)
            if errors is None:
                raise err
            errors.append(err)
        seen.add(s.binding)
    return Scope(sources)


def extend_env(
    select: A.Select,
    schema: HybridSchema,
    env: Env,
    errors: Optional[list[ResolutionError]] = None,
) -> dict[str, Shape]:
    """``env`` plus the CTEs declared on ``select``, each seeing its predecessors."""
    out = dict(env)
    for cte in select.ctes:
        shape = output_shape(cte.query, schema, out, errors)
        out[cte.name] = shape if shape is not None else Shape((), ())
    return out


def item_name(item: A.SelectItem) -> str:
    if item.alias:
        return item.alias
    if isinstance(item.expr, A.ColumnRef):
        return item.expr.name
    return render_expr(item.expr)


def output_shape(
    select: A.Select,
    schema: HybridSchema,
    env: Env,
    errors: Optional[list[ResolutionError]] = None,
) -> Optional[Shape]:
    inner_env = extend_env(select, schema, env, errors)
    scope = build_scope(select, schema, inner_env, errors)
    names: list[str] = []
    types: list[Optional[ScalarType]] = []
    for item in select.items:
        if isinstance(item.expr, A.Star):
            try:
                expanded = scope.star(item.expr.table)
            except ResolutionError as err:
                if errors is None:
                    raise
                errors.append(err)
                continue
            for name, slot in expanded:
                names.append(name)
                types.append(slot.type)
            continue
        names.append(item_name(item))
        try:
            types.append(infer_type(item.expr, scope))
        except ResolutionError as err:
            if errors is None:
                raise
            errors.append(err)
            types.append(None)
    return Shape(tuple(names), tuple(types))


def infer_type(expr: A.Expr, scope: Scope) -> Optional[ScalarType]:
    """Best-effort static type; ``None`` means unknown or NULL."""
    if isinstance(expr, A.Literal):
        v = expr.value
        if isinstance(v, bool):
            return ScalarType.BOOLEAN
        if isinstance(v, int):
            return ScalarType.INTEGER
        if isinstance(v, float):
            return ScalarType.REAL
        if isinstance(v, str):
            return ScalarType.TEXT
        return None
    if isinstance(expr, A.ColumnRef):
        return scope.resolve(expr).type
    if isinstance(expr, A.BinaryOp):
        if expr.op in ("+", "-", "*", "/", "%"):
            lt, rt = infer_type(expr.left, scope), infer_type(expr.right, scope)
            if ScalarType.REAL in (lt, rt):
                return ScalarType.REAL
            return ScalarType.INTEGER
        return ScalarType.BOOLEAN
    if isinstance(expr, A.UnaryOp):
        if expr.op == "NOT":
            return ScalarType.BOOLEAN
        t = infer_type(expr.operand, scope)
        return ScalarType.INTEGER if t is ScalarType.BOOLEAN else t
    if isinstance(expr, A.FuncCall):
        name = expr.name
        if name in ("COUNT", "LENGTH"):
            return ScalarType.INTEGER
        if name in ("AVG", "ROUND"):
            return ScalarType.REAL
        if name in ("LOWER", "UPPER"):
            return ScalarType.TEXT
        arg_types = [infer_type(a, scope) for a in expr.args if not isinstance(a, A.Star)]
        if name == "COALESCE":
            return next((t for t in arg_types if t is not None), None)
        if name == "SUM":
            t = arg_types[0] if arg_types else None
            return ScalarType.INTEGER if t is ScalarType.BOOLEAN else t
        return arg_types[0] if arg_types else None
    if isinstance(expr, A.Param):
        return None
    return ScalarType.BOOLEAN


def is_numeric(t: Optional[ScalarType]) -> bool:
    return t in _NUMERIC


def comparable(a: Optional[ScalarType], b: Optional[ScalarType]) -> bool:
    if a is None or b is None:
        return True
    return (a is ScalarType.TEXT) == (b is ScalarType.TEXT)


def rewrite_expr(expr: Any, fn: Callable[[Any], Any]) -> Any:
    """Top-down rewrite: ``fn`` returns a replacement node or ``None`` to recurse.

    Subquery bodies are left untouched.
    """
    new = fn(expr)
    if new is not None:
        return new
    if isinstance(expr, A.InSubquery):
        return replace(expr, expr=rewrite_expr(expr.expr, fn))
    if not is_dataclass(expr):
        return expr
    changes = {}
    for f in fields(expr):
        if f.name == "pos":
            continue
        value = getattr(expr, f.name)
        if is_dataclass(value):
            nv = rewrite_expr(value, fn)
        elif isinstance(value, tuple) and any(is_dataclass(x) for x in value):
            nv = tuple(rewrite_expr(x, fn) for x in value)
        else:
            continue
        if nv is not value:
            changes[f.name] = nv
    return replace(expr, **changes) if changes else expr


def substitute_aliases(expr: Any, aliases: Mapping[str, Any], scope: Scope, prefer_alias: bool) -> Any:
    """Replace bare references to select-list aliases by the aliased expression.

    ORDER BY prefers the alias; HAVING prefers a source column of that name.
    """
    if not aliases:
        return expr

    def fn(e: Any) -> Any:
        if isinstance(e, A.ColumnRef) and e.table is None and e.name in aliases:
            if prefer_alias:
                return aliases[e.name]
            try:
                scope.resolve(e)
            except ResolutionError:
                return aliases[e.name]
            return e
        return None

    return rewrite_expr(expr, fn)
