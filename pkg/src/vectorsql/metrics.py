"""Benchmark scoring: set scores, nDCG, RRF fusion and decomposed accuracy."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Any, Hashable, Iterable, Optional, Sequence, Union

import numpy as np

from . import ast as A
from .embedding import Embedder
from .errors import EmptyGoldError, ParseError
from .model import HybridSchema, ResultSet
from .serialize import register
from .sql.parser import parse

RRF_C = 60


def _ids(x: Union[ResultSet, Iterable[Hashable]]) -> list[Hashable]:
    if isinstance(x, ResultSet):
        return x.ids
    return list(x)


def set_scores(pred: Union[ResultSet, Iterable[Hashable]], gold: Union[ResultSet, Iterable[Hashable]]) -> tuple[float, float, float]:
    """(precision, recall, f1) over row-id sets; an empty prediction scores zero."""
    p, g = set(_ids(pred)), set(_ids(gold))
    if not g:
        raise EmptyGoldError("gold set is empty")
    if not p:
        return 0.0, 0.0, 0.0
    hit = len(p & g)
    precision = hit / len(p)
    recall = hit / len(g)
    return precision, recall, f1_score(precision, recall)


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def ndcg_at_k(pred: Sequence[Hashable], gold: Iterable[Hashable], k: int) -> float:
    """Binary-relevance nDCG with a log2 discount; rank i is 1-based."""
    if k < 1:
        raise ValueError("k must be >= 1")
    g = set(gold)
    if not pred or not g:
        return 0.0
    seen: set = set()
    dcg = 0.0
    for i, item in enumerate(list(pred)[:k], start=1):
        if item in g and item not in seen:
            dcg += 1.0 / math.log2(i + 1)
        seen.add(item)
    idcg = sum(1.0 / math.log2(i + 1) for i in range(1, min(k, len(g)) + 1))
    return dcg / idcg


def rrf_scores(rankings: Sequence[Sequence[Hashable]], c: float = RRF_C) -> dict[Hashable, float]:
    if not rankings:
        raise ValueError("at least one ranking is required")
    if c <= 0:
        raise ValueError("c must be positive")
    parts: dict[Hashable, list[float]] = {}
    for ranking in rankings:
        for rank, item in enumerate(ranking, start=1):
            parts.setdefault(item, []).append(1.0 / (c + rank))
    return {item: math.fsum(v) for item, v in parts.items()}


def rrf_fuse(rankings: Sequence[Sequence[Hashable]], c: float = RRF_C) -> list[Hashable]:
    """Reciprocal rank fusion; ties broken by ascending id."""
    scores = rrf_scores(rankings, c)
    return sorted(scores, key=lambda item: (-scores[item], item))


# ACC_SQL: structural equality of canonicalised queries


class _Canon:
    """Alias-free, order-normalised form of a query without its vector parts."""

    def __init__(self, schema: Optional[HybridSchema]) -> None:
        self.schema = schema

    def select(self, sel: A.Select, ctes: dict[str, tuple[A.Select, dict]]) -> tuple:
        env = dict(ctes)
        for cte in sel.ctes:
            env[cte.name] = (cte.query, dict(env))
        labels: dict[str, str] = {}
        columns: dict[str, set[str]] = {}
        forms: list[tuple] = []
        counts: dict[str, int] = {}
        for src in sel.from_.sources if sel.from_ is not None else ():
            if isinstance(src, A.SubqueryRef):
                form = ("sub", self.select(src.query, env))
                cols = self._output_names(src.query)
            elif src.name in env:
                body, body_env = env[src.name]
                form = ("sub", self.select(body, body_env))
                cols = self._output_names(body)
            else:
                form = ("table", src.name)
                table = self.schema.table(src.name) if self.schema is not None else None
                cols = set()
                if table is not None:
                    cols = {c.name for c in table.columns} | {v.name for v in table.vector_columns}
            base = src.name if form[0] == "table" else "sub:" + hashlib.blake2b(repr(form).encode(), digest_size=6).hexdigest()
            n = counts.get(base, 0)
            counts[base] = n + 1
            label = base if n == 0 else f"{base}#{n}"
            labels[src.binding] = label
            columns[label] = cols
            forms.append((label, form))
        self._frames = getattr(self, "_frames", [])
        self._frames.append((labels, columns, env))
        try:
            inner_on: list[tuple] = []
            left: list[tuple] = []
            if sel.from_ is not None:
                for j in sel.from_.joins:
                    conj = _ordered(self.expr(c) for c in _flatten("AND", j.on))
                    if j.kind == "LEFT":
                        left.append((labels[j.source.binding], conj))
                    else:
                        inner_on.extend(conj)
            from_part = (_ordered(forms), _ordered(inner_on), _ordered(left))
            items = []
            for it in sel.items:
                if isinstance(it.expr, A.Star):
                    items.append(("star", labels.get(it.expr.table, it.expr.table) if it.expr.table else None))
                else:
                    items.append(self.expr(it.expr))
            where = self.expr(sel.where) if sel.where is not None else None
            group = _ordered(self.expr(g) for g in sel.group_by)
            having = self.expr(sel.having) if sel.having is not None else None
            order = tuple((self.expr(o.expr), o.descending) for o in sel.order_by)
            return (
                "select",
                sel.distinct,
                _ordered(items),
                from_part,
                where,
                group,
                having,
                order,
            )
        finally:
            self._frames.pop()

    def _output_names(self, sel: A.Select) -> set[str]:
        from .scope import item_name

        return {item_name(it) for it in sel.items if not isinstance(it.expr, A.Star)}

    def column(self, ref: A.ColumnRef) -> tuple:
        labels, columns, _ = self._frames[-1]
        if ref.table is not None:
            return ("col", labels.get(ref.table, ref.table), ref.name)
        hits = [label for label, cols in columns.items() if ref.name in cols]
        if len(hits) == 1:
            return ("col", hits[0], ref.name)
        if len(columns) == 1:
            return ("col", next(iter(columns)), ref.name)
        return ("col", None, ref.name)

    def expr(self, e: Any) -> tuple:
        if isinstance(e, A.Literal):
            return ("lit", type(e.value).__name__, e.value)
        if isinstance(e, A.ColumnRef):
            return self.column(e)
        if isinstance(e, A.BinaryOp):
            if e.op in ("AND", "OR"):
                return (e.op, _ordered(self.expr(x) for x in _flatten(e.op, e)))
            left, right = self.expr(e.left), self.expr(e.right)
            if e.op in _MIRROR and repr(right) < repr(left):
                return ("bin", _MIRROR[e.op], right, left)
            if e.op in ("+", "*") and repr(right) < repr(left):
                left, right = right, left
            return ("bin", e.op, left, right)
        if isinstance(e, A.UnaryOp):
            return ("un", e.op, self.expr(e.operand))
        if isinstance(e, A.FuncCall):
            return ("fn", e.name, e.distinct, tuple(self.expr(a) for a in e.args))
        if isinstance(e, A.Star):
            return ("star",)
        if isinstance(e, A.InList):
            return ("inlist", self.expr(e.expr), _ordered(set(self.expr(i) for i in e.items)), e.negated)
        if isinstance(e, A.InSubquery):
            _, _, env = self._frames[-1]
            return ("insub", self.expr(e.expr), self.select(e.query, env), e.negated)
        if isinstance(e, A.Between):
            return ("between", self.expr(e.expr), self.expr(e.low), self.expr(e.high), e.negated)
        if isinstance(e, A.Like):
            return ("like", self.expr(e.expr), self.expr(e.pattern), e.negated)
        if isinstance(e, A.IsNull):
            return ("isnull", self.expr(e.expr), e.negated)
        if isinstance(e, A.Param):
            return ("param", e.index)
        raise TypeError(f"cannot canonicalise {type(e).__name__}")


_MIRROR = {"=": "=", "!=": "!=", "<": ">", ">": "<", "<=": ">=", ">=": "<="}


def _ordered(items: Iterable[Any]) -> tuple:
    return tuple(sorted(items, key=repr))


def _flatten(op: str, e: Any) -> list[Any]:
    if isinstance(e, A.BinaryOp) and e.op == op:
        return _flatten(op, e.left) + _flatten(op, e.right)
    return [e]


def canonical_form(query: A.Select, schema: Optional[HybridSchema] = None) -> tuple:
    """Comparable structure of ``query`` ignoring aliases, vector clauses and LIMIT."""
    return _Canon(schema).select(query, {})


def acc_sql(
    pred: Union[A.Select, str], gold: Union[A.Select, str], schema: Optional[HybridSchema] = None
) -> int:
    """1 iff FROM/JOIN, SELECT, WHERE, GROUP BY/HAVING and ORDER BY all agree."""
    try:
        p = parse(pred) if isinstance(pred, str) else pred
        g = parse(gold) if isinstance(gold, str) else gold
    except ParseError:
        return 0
    try:
        return int(canonical_form(p, schema) == canonical_form(g, schema))
    except TypeError:
        return 0


# ACC_Vec


def vector_columns_of(query: A.Select, schema: Optional[HybridSchema] = None) -> set[str]:
    """``table.column`` for every vector clause, resolving aliases at each level."""
    out: set[str] = set()
    for ctx in A.iter_selects(query):
        sel = ctx.select
        if sel.vector is None:
            continue
        col = sel.vector.column
        tables = []
        if sel.from_ is not None:
            for src in sel.from_.sources:
                if isinstance(src, A.TableRef) and (col.table is None or src.binding == col.table):
                    tables.append(src.name)
        if col.table is None and schema is not None:
            tables = [t for t in tables if schema.table(t) and schema.table(t).vector_column(col.name)]
        name = f"{tables[0]}.{col.name}" if len(tables) == 1 else col.name
        out.add(name)
    return out


def _normalise_columns(cols: Iterable[Union[str, tuple[str, str]]]) -> set[str]:
    return {c if isinstance(c, str) else f"{c[0]}.{c[1]}" for c in cols}


def acc_vec(
    pred_query: Union[A.Select, str],
    gold_columns: Iterable[Union[str, tuple[str, str]]],
    pred_keywords: Optional[Sequence[str]],
    gold_keywords: Sequence[str],
    embedder: Embedder,
    schema: Optional[HybridSchema] = None,
) -> float:
    """0 when the vector columns differ; else mean cosine over greedily aligned keywords.

    ``pred_keywords`` defaults to the EMBED texts of the predicted query.
    Pairs are matched greedily by highest similarity without replacement and
    each similarity is clamped to [0, 1].
    """
    if not gold_keywords:
        raise ValueError("gold keywords must be non-empty")
    try:
        q = parse(pred_query) if isinstance(pred_query, str) else pred_query
    except ParseError:
        return 0.0
    gold = _normalise_columns(gold_columns)
    pred = vector_columns_of(q, schema)
    if any("." not in c for c in gold | pred):
        gold = {c.rsplit(".", 1)[-1] for c in gold}
        pred = {c.rsplit(".", 1)[-1] for c in pred}
    if pred != gold:
        return 0.0
    kws = list(pred_keywords) if pred_keywords is not None else A.embed_texts(q)
    if not kws:
        return 0.0
    P = np.vstack([np.asarray(embedder.embed_array(t)) for t in kws])
    G = np.vstack([np.asarray(embedder.embed_array(t)) for t in gold_keywords])
    P = P / np.linalg.norm(P, axis=1, keepdims=True)
    G = G / np.linalg.norm(G, axis=1, keepdims=True)
    sim = np.clip(P @ G.T, 0.0, 1.0)
    return float(np.mean(greedy_alignment(sim)))


def greedy_alignment(sim: np.ndarray) -> list[float]:
    """Similarities of greedily matched pairs; ties go to the lowest (row, column)."""
    sim = np.array(sim, dtype=np.float64)
    used_r: set[int] = set()
    used_c: set[int] = set()
    pairs = sorted(
        ((sim[i, j], i, j) for i in range(sim.shape[0]) for j in range(sim.shape[1])),
        key=lambda t: (-t[0], t[1], t[2]),
    )
    out = []
    for s, i, j in pairs:
        if i in used_r or j in used_c:
            continue
        used_r.add(i)
        used_c.add(j)
        out.append(float(s))
    return out


@register
@dataclass(frozen=True)
class ScoreReport:
    precision: float
    recall: float
    f1: float
    ndcg_at_k: float
    acc_sql: Optional[int] = None
    acc_vec: Optional[float] = None
    execution_success: bool = True

    def __post_init__(self) -> None:
        for name in ("precision", "recall", "f1", "ndcg_at_k"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if abs(self.f1 - f1_score(self.precision, self.recall)) > 1e-12:
            raise ValueError("f1 must be the harmonic mean of precision and recall")
        if self.acc_sql not in (None, 0, 1):
            raise ValueError("acc_sql must be 0 or 1")
        if self.acc_vec is not None and not 0.0 <= self.acc_vec <= 1.0:
            raise ValueError("acc_vec must lie in [0, 1]")

    @classmethod
    def failed(cls) -> "ScoreReport":
        return cls(0.0, 0.0, 0.0, 0.0, None, None, False)

    @classmethod
    def score(
        cls,
        pred: Union[ResultSet, Sequence[Hashable]],
        gold: Union[ResultSet, Sequence[Hashable]],
        k: int,
        acc_sql: Optional[int] = None,
        acc_vec: Optional[float] = None,
    ) -> "ScoreReport":
        p, r, f = set_scores(pred, gold)
        n = ndcg_at_k(_ids(pred), _ids(gold), k)
        return cls(p, r, f, n, acc_sql, acc_vec, True)

    CSV_FIELDS = ("precision", "recall", "f1", "ndcg_at_k", "acc_sql", "acc_vec", "execution_success")

    def csv_row(self) -> list[str]:
        out = []
        for name in self.CSV_FIELDS:
            v = getattr(self, name)
            out.append("" if v is None else (str(int(v)) if isinstance(v, bool) else repr(v) if isinstance(v, float) else str(v)))
        return out
