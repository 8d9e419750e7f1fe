"""Evaluation of VectorSQL queries over a :class:`HybridStore`.

Row identity: a base-table row is identified by ``(primary key,)``; a joined
row by the concatenation of its sources' ids (``-1`` entries for the
null-extended side of a LEFT JOIN); grouped and DISTINCT rows by
``(stable hash of the group key,)``. Without ORDER BY, output is sorted by
row id. A vector-ordered level sorts by (distance, row id); a grouped
vector level ranks each group by its closest member.

SQL semantics: three-valued logic for NULL, NULL sorts first ascending,
division or modulo by zero yields NULL, integer division truncates toward
zero, LIKE is case-sensitive.
"""

from __future__ import annotations

import hashlib
import math
import operator
import re
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Optional, Union

import numpy as np

from .. import ast as A
from ..embedding import Embedder, default_embedder
from ..errors import DimensionMismatchError, QueryTimeoutError, ResolutionError, TypeMismatchError
from ..index.exact import metric_distances
from ..model import ResultRow, ResultSet, RowId, VectorColumnDef
from ..scope import Scope, Shape, SourceInfo, item_name, substitute_aliases, table_shape
from ..sql.parser import parse
from .store import HybridStore
from .strategy import ExecStrategy, Iterative, PostFilter, PreFilter

DEFAULT_TIMEOUT = 60.0

Fn = Callable[[Any], Any]


class Deadline:
    def __init__(self, seconds: Optional[float]) -> None:
        if seconds is not None and seconds <= 0:
            raise ValueError("timeout must be positive")
        self.seconds = seconds
        self.end = None if seconds is None else time.monotonic() + seconds

    def check(self) -> None:
        if self.end is not None and time.monotonic() > self.end:
            raise QueryTimeoutError(f"query exceeded {self.seconds:g}s")


@dataclass
class Rel:
    columns: tuple[str, ...]
    ids: list[RowId]
    rows: list[tuple]
    id_width: int
    dists: Optional[list[float]] = None


def stable_hash(key: Any) -> int:
    digest = hashlib.blake2b(repr(key).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little", signed=True)


# scalar semantics


def _not(v: Any) -> Any:
    return None if v is None else not v


def _and(a: Fn, b: Fn) -> Fn:
    def f(r: Any) -> Any:
        x = a(r)
        if x is False:
            return False
        y = b(r)
        if y is False:
            return False
        if x is None or y is None:
            return None
        return True

    return f


def _or(a: Fn, b: Fn) -> Fn:
    def f(r: Any) -> Any:
        x = a(r)
        if x is True:
            return True
        y = b(r)
        if y is True:
            return True
        if x is None or y is None:
            return None
        return False

    return f


_CMP = {
    "=": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}


def _check_comparable(x: Any, y: Any) -> None:
    if isinstance(x, str) != isinstance(y, str):
        raise TypeMismatchError(f"cannot compare {x!r} with {y!r}")


def compare(op: str, x: Any, y: Any) -> Any:
    if x is None or y is None:
        return None
    _check_comparable(x, y)
    return _CMP[op](x, y)


def _num(v: Any, op: str) -> Any:
    if isinstance(v, str):
        raise TypeMismatchError(f"operator {op!r} applied to text")
    return int(v) if isinstance(v, bool) else v


def arith(op: str, x: Any, y: Any) -> Any:
    if x is None or y is None:
        return None
    x, y = _num(x, op), _num(y, op)
    if op == "+":
        return x + y
    if op == "-":
        return x - y
    if op == "*":
        return x * y
    if y == 0:
        return None
    if op == "/":
        if isinstance(x, int) and isinstance(y, int):
            q = abs(x) // abs(y)
            return q if (x >= 0) == (y >= 0) else -q
        return x / y
    if isinstance(x, int) and isinstance(y, int):
        r = abs(x) % abs(y)
        return r if x >= 0 else -r
    return math.fmod(x, y)


@lru_cache(maxsize=1024)
def like_regex(pattern: str) -> re.Pattern:
    parts = []
    for ch in pattern:
        if ch == "%":
            parts.append(".*")
        elif ch == "_":
            parts.append(".")
        else:
            parts.append(re.escape(ch))
    return re.compile("".join(parts), re.DOTALL)


def sql_round(x: Any, digits: Any = 0) -> Any:
    if x is None or digits is None:
        return None
    x = float(_num(x, "ROUND"))
    scale = 10.0 ** int(digits)
    return math.copysign(math.floor(abs(x) * scale + 0.5) / scale, x)


def _text_fn(name: str, fn: Callable[[str], Any]) -> Callable[[Any], Any]:
    def f(v: Any) -> Any:
        if v is None:
            return None
        if not isinstance(v, str):
            raise TypeMismatchError(f"{name} expects text, got {v!r}")
        return fn(v)

    return f


def _abs(v: Any) -> Any:
    return None if v is None else abs(_num(v, "ABS"))


_SCALAR_IMPL: dict[str, Callable[..., Any]] = {
    "LOWER": _text_fn("LOWER", str.lower),
    "UPPER": _text_fn("UPPER", str.upper),
    "LENGTH": _text_fn("LENGTH", len),
    "ABS": _abs,
    "ROUND": sql_round,
    "COALESCE": lambda *vs: next((v for v in vs if v is not None), None),
}


def aggregate(name: str, values: list[Any], distinct: bool) -> Any:
    """Aggregate over already-evaluated argument values (NULLs included)."""
    vals = [v for v in values if v is not None]
    if distinct:
        seen: dict[Any, None] = {}
        for v in vals:
            seen.setdefault(v, None)
        vals = list(seen)
    if name == "COUNT":
        return len(vals)
    if not vals:
        return None
    if name in ("SUM", "AVG"):
        nums = [_num(v, name) for v in vals]
        if name == "SUM":
            if all(isinstance(v, int) for v in nums):
                return sum(nums)
            return math.fsum(nums)
        return math.fsum(nums) / len(nums)
    try:
        return min(vals) if name == "MIN" else max(vals)
    except TypeError as exc:
        raise TypeMismatchError(f"{name} over mixed types") from exc


def sort_key(v: Any) -> tuple:
    return (0, 0) if v is None else (1, v)


def _sorted(items: list, key: Callable[[Any], Any], reverse: bool = False) -> list:
    try:
        return sorted(items, key=key, reverse=reverse)
    except TypeError as exc:
        raise TypeMismatchError("ORDER BY over mixed types") from exc


# expression compilation

ROW, GROUP = "row", "group"


class _Compiler:
    """Turn expressions into closures over a flat row (or a list of rows)."""

    def __init__(self, run: "_Run", scope: Scope, env: dict[str, Rel], mode: str) -> None:
        self.run = run
        self.scope = scope
        self.env = env
        self.mode = mode

    def __call__(self, expr: A.Expr) -> Fn:
        return self.c(expr)

    def c(self, e: Any) -> Fn:
        if isinstance(e, A.Literal):
            v = e.value
            return lambda r: v
        if isinstance(e, A.ColumnRef):
            idx = self.scope.resolve(e).index
            if idx < 0:
                raise ResolutionError(f"cannot resolve {e.name!r}", "unknown-column", e)
            if self.mode == ROW:
                return operator.itemgetter(idx)
            return lambda g: g[0][idx] if g else None
        if isinstance(e, A.Param):
            raise ResolutionError(f"parameter ${e.index} is unbound", "unbound-parameter", e)
        if isinstance(e, A.BinaryOp):
            a, b = self.c(e.left), self.c(e.right)
            if e.op == "AND":
                return _and(a, b)
            if e.op == "OR":
                return _or(a, b)
            op = e.op
            if op in _CMP:
                return lambda r: compare(op, a(r), b(r))
            return lambda r: arith(op, a(r), b(r))
        if isinstance(e, A.UnaryOp):
            a = self.c(e.operand)
            if e.op == "NOT":
                return lambda r: _not(a(r))
            return lambda r: arith("-", 0, a(r))
        if isinstance(e, A.FuncCall):
            if e.is_aggregate:
                return self.agg(e)
            impl = _SCALAR_IMPL[e.name]
            args = [self.c(x) for x in e.args]
            return lambda r: impl(*(f(r) for f in args))
        if isinstance(e, A.IsNull):
            a = self.c(e.expr)
            if e.negated:
                return lambda r: a(r) is not None
            return lambda r: a(r) is None
        if isinstance(e, A.Between):
            x, lo, hi = self.c(e.expr), self.c(e.low), self.c(e.high)
            f = _and(lambda r: compare(">=", x(r), lo(r)), lambda r: compare("<=", x(r), hi(r)))
            return (lambda r: _not(f(r))) if e.negated else f
        if isinstance(e, A.Like):
            x, p = self.c(e.expr), self.c(e.pattern)
            neg = e.negated

            def like(r: Any) -> Any:
                v, pat = x(r), p(r)
                if v is None or pat is None:
                    return None
                if not isinstance(v, str) or not isinstance(pat, str):
                    raise TypeMismatchError("LIKE requires text operands")
                hit = like_regex(pat).fullmatch(v) is not None
                return hit != neg

            return like
        if isinstance(e, A.InList):
            x = self.c(e.expr)
            items = [self.c(i) for i in e.items]
            neg = e.negated

            def in_list(r: Any) -> Any:
                v = x(r)
                if v is None:
                    return None
                unknown = False
                for it in items:
                    w = it(r)
                    if w is None:
                        unknown = True
                        continue
                    _check_comparable(v, w)
                    if v == w:
                        return not neg
                return None if unknown else neg

            return in_list
        if isinstance(e, A.InSubquery):
            x = self.c(e.expr)
            neg = e.negated
            run, env, sub = self.run, self.env, e.query

            def in_sub(r: Any) -> Any:
                v = x(r)
                if v is None:
                    return None
                values, has_null, kinds = run.subquery_values(sub, env)
                if kinds and isinstance(v, str) not in kinds:
                    raise TypeMismatchError(f"cannot compare {v!r} with the subquery's values")
                if v in values:
                    return not neg
                return None if has_null else neg

            return in_sub
        if isinstance(e, A.Star):
            raise ResolutionError("'*' is not an expression", "unknown-column", e)
        raise TypeError(f"cannot evaluate {type(e).__name__}")

    def agg(self, e: A.FuncCall) -> Fn:
        if self.mode != GROUP:
            raise ResolutionError(f"aggregate {e.name} is not allowed here", "aggregate-misuse", e)
        name, distinct = e.name, e.distinct
        if len(e.args) == 1 and isinstance(e.args[0], A.Star):
            return lambda g: len(g)
        inner = _Compiler(self.run, self.scope, self.env, ROW)
        arg = inner.c(e.args[0])
        return lambda g: aggregate(name, [arg(r) for r in g], distinct)


# execution


def _conjuncts(e: Any) -> list[Any]:
    if isinstance(e, A.BinaryOp) and e.op == "AND":
        return _conjuncts(e.left) + _conjuncts(e.right)
    return [e]


def _sources_of(e: Any, scope: Scope) -> set[int]:
    out = set()
    for n in A.walk_expr(e):
        if isinstance(n, A.ColumnRef):
            out.add(scope.resolve(n).source)
    return out


class _Run:
    def __init__(
        self,
        store: HybridStore,
        strategy: ExecStrategy,
        embedder: Optional[Embedder],
        deadline: Deadline,
    ) -> None:
        self.store = store
        self.strategy = strategy
        self.embedder = embedder
        self.deadline = deadline
        self.truncated = False
        self._subqueries: dict[tuple[int, int], tuple[frozenset, bool, frozenset]] = {}
        self._base: dict[str, Rel] = {}
        self._ticks = 0

    def tick(self) -> None:
        self._ticks += 1
        if self._ticks & 255 == 0:
            self.deadline.check()

    def subquery_values(self, sub: A.Select, env: dict[str, Rel]) -> tuple[frozenset, bool, frozenset]:
        key = (id(sub), id(env))
        hit = self._subqueries.get(key)
        if hit is None:
            rel = self.run(sub, env)
            if len(rel.columns) != 1:
                raise ResolutionError("IN subquery must select exactly one column", "subquery-columns", sub)
            vals = [r[0] for r in rel.rows]
            present = frozenset(v for v in vals if v is not None)
            kinds = frozenset(isinstance(v, str) for v in present)
            hit = (present, any(v is None for v in vals), kinds)
            self._subqueries[key] = hit
        return hit

    def base_rel(self, name: str) -> Rel:
        rel = self._base.get(name)
        if rel is None:
            data = self.store.table(name)
            rel = Rel(tuple(c.name for c in data.table.columns), [(i,) for i in data.ids], data.rows, 1)
            self._base[name] = rel
        return rel

    def query_vector(self, clause: A.VectorClause, vc: VectorColumnDef) -> np.ndarray:
        target = clause.target
        if isinstance(target, A.VectorLiteral):
            q = np.asarray(target.values, dtype=np.float64)
        elif isinstance(target, A.EmbedText) and isinstance(target.text, str):
            emb = self.embedder if self.embedder is not None else default_embedder(vc.embedder, vc.dim)
            q = np.asarray(emb.embed_array(target.text), dtype=np.float64)
        else:
            raise ResolutionError("vector target is an unbound parameter", "unbound-parameter", clause)
        if q.shape[0] != vc.dim:
            raise DimensionMismatchError(f"query vector has dim {q.shape[0]}, column {vc.name!r} has {vc.dim}")
        return q

    # one SELECT level

    def run(self, select: A.Select, env: dict[str, Rel]) -> Rel:
        self.deadline.check()
        if select.ctes:
            env = dict(env)
            for cte in select.ctes:
                env[cte.name] = self.run(cte.query, env)

        rels: list[Rel] = []
        infos: list[SourceInfo] = []
        if select.from_ is not None:
            kinds = ["INNER"] + [j.kind for j in select.from_.joins]
            for src, kind in zip(select.from_.sources, kinds):
                nullable = kind == "LEFT"
                if isinstance(src, A.SubqueryRef):
                    rel = self.run(src.query, env)
                    info = SourceInfo(src.alias, Shape(rel.columns, (None,) * len(rel.columns)), src, nullable=nullable)
                elif src.name in env:
                    rel = env[src.name]
                    info = SourceInfo(
                        src.binding, Shape(rel.columns, (None,) * len(rel.columns)), src, cte=src.name, nullable=nullable
                    )
                else:
                    table = self.store.schema.table(src.name)
                    if table is None:
                        raise ResolutionError(f"unknown table {src.name!r}", "unknown-table", src)
                    rel = self.base_rel(src.name)
                    info = SourceInfo(src.binding, table_shape(table), src, table=table, nullable=nullable)
                rels.append(rel)
                infos.append(info)
            bindings = [i.binding for i in infos]
            if len(set(bindings)) != len(bindings):
                raise ResolutionError("duplicate table binding", "duplicate-binding", select)
        scope = Scope(infos)
        id_width = sum(r.id_width for r in rels)

        level = _Level(self, select, scope, rels, env)
        clause = select.vector
        if clause is None:
            return level.evaluate(None)

        vsrc, vc = scope.resolve_vector(clause.column)
        if infos[vsrc].nullable:
            raise ResolutionError("vector column on the nullable side of a LEFT JOIN", "nullable-vector", clause)
        if isinstance(clause.k, A.Param):
            raise ResolutionError("k is an unbound parameter", "unbound-parameter", clause)
        if clause.k < 1:
            raise ValueError("k must be >= 1")
        q = self.query_vector(clause, vc)
        table = infos[vsrc].table
        assert table is not None
        level.set_vector(vsrc, sum(r.id_width for r in rels[:vsrc]), table.name, vc, clause, q)

        k = clause.k
        strategy = self.strategy
        if isinstance(strategy, PreFilter):
            return level.evaluate(None)
        index = self.store.index(table.name, vc.name)
        if isinstance(strategy, PostFilter):
            schedule = [strategy.candidates(k)]
        elif isinstance(strategy, Iterative):
            schedule = strategy.schedule(k)
        else:
            raise TypeError(f"unknown strategy {strategy!r}")
        out = None
        for kp in schedule:
            self.deadline.check()
            cands = index.search(q, kp, max(index.ef_search, kp))
            out = level.evaluate({i for i, _ in cands})
            exhausted = len(cands) < kp
            if len(out.rows) >= k or exhausted:
                break
        assert out is not None
        if len(out.rows) < k and not exhausted:
            self.truncated = True
        return out


class _Level:
    def __init__(self, run: _Run, select: A.Select, scope: Scope, rels: list[Rel], env: dict[str, Rel]) -> None:
        self.run = run
        self.select = select
        self.scope = scope
        self.rels = rels
        self.env = env
        self.row_c = _Compiler(run, scope, env, ROW)
        self.group_c = _Compiler(run, scope, env, GROUP)
        self.vector: Optional[tuple] = None
        self.where = self.row_c(select.where) if select.where is not None else None
        self.joins = self._compile_joins()

    def set_vector(self, vsrc: int, id_pos: int, table: str, vc: VectorColumnDef, clause: A.VectorClause, q: np.ndarray) -> None:
        self.vector = (vsrc, id_pos, table, vc, clause, q)

    def _compile_joins(self) -> list[tuple]:
        out = []
        if self.select.from_ is None:
            return out
        for j, join in enumerate(self.select.from_.joins):
            right = j + 1
            partial = Scope(self.scope.sources[: right + 1])
            solo = Scope([self.scope.sources[right]])
            lkeys: list[Fn] = []
            rkeys: list[Fn] = []
            residual: list[Fn] = []
            for conj in _conjuncts(join.on):
                pair = None
                if isinstance(conj, A.BinaryOp) and conj.op == "=":
                    ls, rs = _sources_of(conj.left, partial), _sources_of(conj.right, partial)
                    if ls and rs:
                        if rs == {right} and right not in ls:
                            pair = (conj.left, conj.right)
                        elif ls == {right} and right not in rs:
                            pair = (conj.right, conj.left)
                if pair is not None:
                    lkeys.append(_Compiler(self.run, partial, self.env, ROW)(pair[0]))
                    rkeys.append(_Compiler(self.run, solo, self.env, ROW)(pair[1]))
                else:
                    residual.append(_Compiler(self.run, partial, self.env, ROW)(conj))
            out.append((join.kind, lkeys, rkeys, residual))
        return out

    def _joined(self, rels: list[Rel]) -> tuple[list[RowId], list[tuple]]:
        if not rels:
            return [()], [()]
        ids, rows = list(rels[0].ids), list(rels[0].rows)
        run = self.run
        for (kind, lkeys, rkeys, residual), right in zip(self.joins, rels[1:]):
            null_row = (None,) * len(right.columns)
            null_id = (-1,) * right.id_width
            table: Optional[dict] = None
            if lkeys:
                table = {}
                for rid, rrow in zip(right.ids, right.rows):
                    key = tuple(f(rrow) for f in rkeys)
                    if any(v is None for v in key):
                        continue
                    table.setdefault(key, []).append((rid, rrow))
            new_ids: list[RowId] = []
            new_rows: list[tuple] = []
            all_right = list(zip(right.ids, right.rows))
            for lid, lrow in zip(ids, rows):
                run.tick()
                if table is not None:
                    key = tuple(f(lrow) for f in lkeys)
                    cands = () if any(v is None for v in key) else table.get(key, ())
                else:
                    cands = all_right
                matched = False
                for rid, rrow in cands:
                    combined = lrow + rrow
                    if all(f(combined) is True for f in residual):
                        new_ids.append(lid + rid)
                        new_rows.append(combined)
                        matched = True
                if kind == "LEFT" and not matched:
                    new_ids.append(lid + null_id)
                    new_rows.append(lrow + null_row)
            ids, rows = new_ids, new_rows
        return ids, rows

    def evaluate(self, restrict: Optional[set[int]]) -> Rel:
        run = self.run
        rels = self.rels
        if restrict is not None and self.vector is not None:
            vsrc = self.vector[0]
            base = rels[vsrc]
            keep = [(i, r) for i, r in zip(base.ids, base.rows) if i[0] in restrict]
            rels = list(rels)
            rels[vsrc] = Rel(base.columns, [i for i, _ in keep], [r for _, r in keep], base.id_width)
        ids, rows = self._joined(rels)
        if self.where is not None:
            w = self.where
            kept_ids, kept_rows = [], []
            for rid, row in zip(ids, rows):
                run.tick()
                if w(row) is True:
                    kept_ids.append(rid)
                    kept_rows.append(row)
            ids, rows = kept_ids, kept_rows
        dists = None
        if self.vector is not None:
            dists = self._distances(ids)
        return self._finish(ids, rows, dists)

    def _distances(self, ids: list[RowId]) -> list[float]:
        _, id_pos, table, vc, clause, q = self.vector  # type: ignore[misc]
        if not ids:
            return []
        ex = self.run.store.exact(table, vc.name)
        pos = np.fromiter((ex.positions[i[id_pos]] for i in ids), dtype=np.int64, count=len(ids))
        # full-matrix pass so equal rows get bit-identical distances in any subset
        return metric_distances(ex.matrix, q, clause.metric)[pos].tolist()

    def _finish(self, ids: list[RowId], rows: list[tuple], dists: Optional[list[float]]) -> Rel:
        sel = self.select
        scope = self.scope
        aliases = {it.alias: it.expr for it in sel.items if it.alias}
        grouped = sel.is_grouped
        comp = self.group_c if grouped else self.row_c

        # units: (id, context, distance)
        units: list[tuple[RowId, Any, Optional[float]]]
        if grouped:
            key_fns = [self.row_c(g) for g in sel.group_by]
            groups: dict[tuple, list[int]] = {}
            if sel.group_by:
                for i, row in enumerate(rows):
                    self.run.tick()
                    groups.setdefault(tuple(f(row) for f in key_fns), []).append(i)
            else:
                groups[()] = list(range(len(rows)))
            units = []
            for key, members in groups.items():
                d = min(dists[i] for i in members) if dists is not None and members else None
                units.append(((stable_hash(key),), [rows[i] for i in members], d))
            if sel.having is not None:
                h = self.group_c(substitute_aliases(sel.having, aliases, scope, prefer_alias=False))
                units = [u for u in units if h(u[1]) is True]
            if dists is not None:
                units = [u for u in units if u[2] is not None]
        else:
            units = [(rid, row, dists[i] if dists is not None else None) for i, (rid, row) in enumerate(zip(ids, rows))]

        columns: list[str] = []
        item_fns: list[Fn] = []
        for item in sel.items:
            if isinstance(item.expr, A.Star):
                for name, slot in scope.star(item.expr.table):
                    columns.append(name)
                    item_fns.append(comp(A.ColumnRef(scope.sources[slot.source].binding, name)))
                continue
            columns.append(item_name(item))
            item_fns.append(comp(item.expr))

        # (id, ctx, distance, values)
        out = [(u[0], u[1], u[2], tuple(f(u[1]) for f in item_fns)) for u in units]
        width = 1 if grouped else sum(r.id_width for r in self.rels)
        if sel.distinct:
            merged: dict[tuple, list] = {}
            for uid, ctx, d, vals in out:
                hit = merged.get(vals)
                if hit is None:
                    merged[vals] = [(stable_hash(vals),), ctx, d, vals, uid]
                else:
                    if d is not None and (hit[2] is None or d < hit[2]):
                        hit[2] = d
                    if uid < hit[4]:
                        hit[1], hit[4] = ctx, uid
            out = [(m[0], m[1], m[2], m[3]) for m in merged.values()]
            width = 1

        if self.vector is not None:
            k = self.vector[4].k
            out = sorted(out, key=lambda u: (u[2], u[0]))[:k]
        else:
            out = _sorted(out, key=lambda u: u[0])
            if sel.order_by:
                keyed = []
                order_fns = [
                    (comp(substitute_aliases(o.expr, aliases, scope, prefer_alias=True)), o.descending)
                    for o in sel.order_by
                ]
                for u in out:
                    keyed.append((tuple(sort_key(f(u[1])) for f, _ in order_fns), u))
                for pos in range(len(order_fns) - 1, -1, -1):
                    keyed = _sorted(keyed, key=lambda kv: kv[0][pos], reverse=order_fns[pos][1])
                out = [u for _, u in keyed]
            if isinstance(sel.limit, A.Param):
                raise ResolutionError("LIMIT is an unbound parameter", "unbound-parameter", sel)
            if sel.limit is not None:
                out = out[: sel.limit]

        return Rel(
            tuple(columns),
            [u[0] for u in out],
            [u[3] for u in out],
            width,
            [u[2] for u in out] if self.vector is not None else None,
        )


QueryLike = Union[A.Select, str]


def _as_query(query: QueryLike) -> A.Select:
    return parse(query) if isinstance(query, str) else query


def execute(
    store: HybridStore,
    query: QueryLike,
    strategy: ExecStrategy = PreFilter(),
    embedder: Optional[Embedder] = None,
    timeout: Optional[float] = DEFAULT_TIMEOUT,
) -> ResultSet:
    """Run ``query`` under ``strategy``; every vector clause uses the strategy.

    ``embedder`` resolves EMBED texts; by default each column's recorded
    embedder id is used. ``timeout`` is a wall-clock budget in seconds,
    checked between operators and periodically inside row loops.
    """
    q = _as_query(query)
    run = _Run(store, strategy, embedder, Deadline(timeout))
    rel = run.run(q, {})
    dists = rel.dists if q.vector is not None else None
    rows = tuple(
        ResultRow(rid, vals, None if dists is None else dists[i]) for i, (rid, vals) in enumerate(zip(rel.ids, rel.rows))
    )
    return ResultSet(rel.columns, rows, run.truncated)


def execute_plain_sql(store: HybridStore, query: QueryLike, timeout: Optional[float] = DEFAULT_TIMEOUT) -> ResultSet:
    q = _as_query(query)
    if A.vector_clauses(q):
        raise ValueError("execute_plain_sql requires a query without vector clauses")
    return execute(store, q, PreFilter(), None, timeout)


@dataclass(frozen=True)
class RecallMeasure:
    precision: float
    recall: float
    result_size: int
    truth_size: int
    truncated: bool


def measure_recall(
    store: HybridStore,
    query: QueryLike,
    strategy: ExecStrategy,
    embedder: Optional[Embedder] = None,
    timeout: Optional[float] = DEFAULT_TIMEOUT,
    truth: Optional[ResultSet] = None,
) -> RecallMeasure:
    """Compare ``strategy``'s row ids against the PreFilter result.

    An empty ground truth counts as full recall.
    """
    q = _as_query(query)
    if not A.vector_clauses(q):
        raise ValueError("measure_recall requires at least one vector clause")
    if truth is None:
        truth = execute(store, q, PreFilter(), embedder, timeout)
    got = truth if isinstance(strategy, PreFilter) else execute(store, q, strategy, embedder, timeout)
    t, g = truth.id_set(), got.id_set()
    hit = len(t & g)
    recall = hit / len(t) if t else 1.0
    precision = hit / len(g) if g else (1.0 if not t else 0.0)
    return RecallMeasure(precision, recall, len(g), len(t), got.truncated)
