"""Query synthesis for a target cell of the complexity space.

A synthesized query is a random *plan* (host table, joins, filters, nested
filters, aggregation) whose rubric cost lands on the target tier, rendered
as SQL. The same plan renders in several syntactically different but
equivalent styles, which serve as the golden variants of a sample.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass
from typing import Any, Optional, Sequence, Union

import numpy as np

from .. import ast as A
from ..embedding import Embedder
from ..engine.executor import execute
from ..engine.store import HybridStore
from ..engine.strategy import PreFilter
from ..errors import UnsatisfiableTargetError, VectorSqlError
from ..model import BenchmarkSample, Integration, Intent, Metric, Structural
from ..sql.parser import parse
from ..sql.render import format_number, quote_string, render
from ..sql.template import canonical_template
from ..validate import validate_query
from .complexity import DEFAULT_RUBRIC, Rubric, classify
from .scholar import SCHOLAR_PROFILE, Filter, JoinEdge, SchemaProfile, TableProfile

MAX_ATTEMPTS = 64
# ExtraHard plans stay within this many rubric points
MAX_EXTRA_HARD_COST = 5


def _enum(cls: Any, value: Any) -> Any:
    return value if isinstance(value, cls) else cls(value)


@dataclass(frozen=True)
class ComplexityTarget:
    structural: Structural
    integration: Integration
    intent: Intent = Intent.ENTITY
    vector_ops: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "structural", _enum(Structural, self.structural))
        object.__setattr__(self, "integration", _enum(Integration, self.integration))
        object.__setattr__(self, "intent", _enum(Intent, self.intent))
        if self.vector_ops < 1:
            raise ValueError("vector_ops must be >= 1")


def derive_seed(*parts: Any) -> int:
    h = hashlib.blake2b("\x1f".join(str(p) for p in parts).encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


def _lit(v: Any) -> str:
    if isinstance(v, bool):
        return "TRUE" if v else "FALSE"
    if isinstance(v, str):
        return quote_string(v)
    return format_number(v)


def _pred_sql(col: str, f: Filter, value: Any) -> str:
    if f.op == "BETWEEN":
        return f"{col} BETWEEN {_lit(value[0])} AND {_lit(value[1])}"
    if f.op == "IN":
        return f"{col} IN ({', '.join(_lit(x) for x in value)})"
    return f"{col} {f.op} {_lit(value)}"


def _value_phrase(f: Filter, value: Any) -> str:
    if f.op == "BETWEEN":
        return f"{f.phrase} {value[0]} and {value[1]}"
    if f.op == "IN":
        return f"{f.phrase} {', '.join(map(str, value))}"
    if isinstance(value, bool):
        return f.phrase
    return f"{f.phrase} {value}"


@dataclass(frozen=True)
class _Pred:
    table: str
    filter: Filter
    value: Any


@dataclass(frozen=True)
class _VecOp:
    table: str
    column: str
    metric: Metric
    keyword: str
    k: int


@dataclass(frozen=True)
class _Nested:
    """``outer.outer_col IN (SELECT inner_col FROM inner [WHERE pred])``, optionally via a CTE."""

    outer: str
    outer_col: str
    inner: str
    inner_col: str
    pred: Optional[_Pred] = None
    cte: Optional[str] = None
    min_count: Optional[int] = None  # GROUP BY inner_col HAVING COUNT(*) >= min_count

    def body(self) -> str:
        sql = f"SELECT {self.inner_col} FROM {self.inner}"
        if self.pred is not None:
            sql += " WHERE " + _pred_sql(self.pred.filter.column, self.pred.filter, self.pred.value)
        if self.min_count is not None:
            sql += f" GROUP BY {self.inner_col} HAVING COUNT(*) >= {self.min_count}"
        return sql


@dataclass
class _Plan:
    integration: Integration
    host: TableProfile
    pk: str
    vec: _VecOp
    extra_vecs: list[_VecOp]
    joins: list[tuple[TableProfile, JoinEdge]]
    preds: list[_Pred]
    nested: list[_Nested]
    agg: Optional[str] = None  # "agg" or "group"
    group_key: Optional[tuple[str, str]] = None
    having: Optional[int] = None
    question: str = ""

    def sql(self, style: int = 0) -> str:
        reverse = bool(style & 1)
        renamed = bool(style & 2)
        tables = [self.host] + [t for t, _ in self.joins]
        alias = {t.name: (f"t{i}" if renamed else t.alias) for i, t in enumerate(tables)}
        ctes: list[str] = []
        conds: list[str] = []

        def vec_sql(v: _VecOp, col: str) -> str:
            metric = "" if v.metric is Metric.L2 else f", {v.metric.name}"
            return f"ORDER BY DISTANCE({col}, EMBED({quote_string(v.keyword)}){metric}) LIMIT {v.k}"

        def knn_cte(name: str, v: _VecOp) -> None:
            pk = self.profiles_pk(v.table)
            ctes.append(f"{name} AS (SELECT {pk} FROM {v.table} {vec_sql(v, v.column)})")
            conds.append(f"{alias[v.table]}.{pk} IN (SELECT {pk} FROM {name})")

        if self.integration is Integration.NON:
            knn_cte("knn", self.vec)
        for i, v in enumerate(self.extra_vecs, start=2):
            knn_cte(f"knn{i}", v)
        for p in self.preds:
            conds.append(_pred_sql(f"{alias[p.table]}.{p.filter.column}", p.filter, p.value))
        for n in self.nested:
            if n.cte is not None:
                ctes.append(f"{n.cte} AS ({n.body()})")
                inner = f"SELECT {n.inner_col} FROM {n.cte}"
            else:
                inner = n.body()
            conds.append(f"{alias[n.outer]}.{n.outer_col} IN ({inner})")
        if reverse:
            conds.reverse()

        items = self._items(alias)
        sql = ""
        if ctes:
            sql = "WITH " + ", ".join(ctes) + " "
        sql += f"SELECT {', '.join(items)} FROM {self.host.name} AS {alias[self.host.name]}"
        for t, e in self.joins:
            a_child, a_parent = alias[e.child], alias[e.parent]
            on = [f"{a_child}.{e.fk}", f"{a_parent}.{e.pk}"]
            if reverse:
                on.reverse()
            sql += f" JOIN {t.name} AS {alias[t.name]} ON {on[0]} = {on[1]}"
        if conds:
            sql += " WHERE " + " AND ".join(conds)
        if self.group_key is not None:
            gt, gc = self.group_key
            sql += f" GROUP BY {alias[gt]}.{gc}"
            if self.having is not None:
                sql += f" HAVING COUNT(*) >= {self.having}"
        if self.integration is not Integration.NON:
            sql += " " + vec_sql(self.vec, f"{alias[self.host.name]}.{self.vec.column}")
        return sql

    def profiles_pk(self, table: str) -> str:
        return self.pk if table == self.host.name else "id"

    def _items(self, alias: dict[str, str]) -> list[str]:
        h = alias[self.host.name]
        if self.agg == "agg":
            items = ["COUNT(*) AS n_rows"]
            if self.host.measure:
                items.append(f"AVG({h}.{self.host.measure}) AS avg_{self.host.measure}")
            return items
        if self.agg == "group":
            gt, gc = self.group_key
            return [f"{alias[gt]}.{gc}", "COUNT(*) AS n_rows"]
        items = [f"{h}.{c}" for c in self.host.display]
        for t, _ in self.joins:
            items.append(f"{alias[t.name]}.{t.display[0]} AS {t.name}_{t.display[0]}")
        return items


def _keyword(rng: np.random.Generator, profile: SchemaProfile, intent: Intent) -> str:
    topic = profile.keyword_topics[int(rng.integers(len(profile.keyword_topics)))]
    if intent is Intent.ENTITY:
        return str(rng.choice(topic.entities))
    if intent is Intent.CONCEPT:
        return topic.concept
    return topic.reasoning


def _neighbours(profile: SchemaProfile, present: set[str]) -> dict[str, list[JoinEdge]]:
    out: dict[str, list[JoinEdge]] = {t: [] for t in present}
    for e in profile.edges:
        if e.child in present and e.parent in present:
            out[e.child].append(e)
            out[e.parent].append(e)
    return out


def _join_paths(host: str, n: int, adj: dict[str, list[JoinEdge]]) -> list[list[tuple[str, JoinEdge]]]:
    """All ways to attach ``n`` further tables to ``host`` along join edges."""
    results: dict[frozenset, list[tuple[str, JoinEdge]]] = {}

    def grow(used: list[str], path: list[tuple[str, JoinEdge]]) -> None:
        if len(path) == n:
            results.setdefault(frozenset(used), list(path))
            return
        for t in used:
            for e in adj[t]:
                other = e.parent if e.child == t else e.child
                if other in used:
                    continue
                path.append((other, e))
                grow(used + [other], path)
                path.pop()

    grow([host], [])
    # one path per table set, in a stable order
    return [results[key] for key in sorted(results, key=sorted)]


@dataclass(frozen=True)
class _Combo:
    joins: int
    nested_in: int
    cte_filter: int
    group_cte: int
    agg: Optional[str]
    having: bool

    def cost(self, rubric: Rubric) -> int:
        c = rubric.join * max(0, self.joins - 1)
        c += self.nested_in * rubric.nested
        c += self.cte_filter * 2 * rubric.nested
        c += self.group_cte * (2 * rubric.nested + rubric.group_by + rubric.having)
        if self.agg == "agg":
            c += rubric.aggregate
        elif self.agg == "group":
            c += rubric.group_by + (rubric.having if self.having else 0)
        return c


def _combos(integration: Integration, max_joins: int) -> list[_Combo]:
    if integration is Integration.JOIN:
        join_range = range(1, max_joins + 1)
    elif integration is Integration.NON:
        join_range = range(0, max_joins + 1)
    else:
        join_range = range(0, 1)
    aggs: list[tuple[Optional[str], bool]] = [(None, False)]
    if integration is Integration.NON:
        aggs += [("agg", False), ("group", False), ("group", True)]
    out = []
    for j, n_in, cte, gcte, (agg, hav) in itertools.product(join_range, range(3), range(2), range(2), aggs):
        out.append(_Combo(j, n_in, cte, gcte, agg, hav))
    return out


class _Builder:
    def __init__(self, store: HybridStore, profile: SchemaProfile, rubric: Rubric) -> None:
        self.store = store
        self.profile = profile
        self.rubric = rubric
        self.present = {t.name for t in profile.tables if store.schema.table(t.name) is not None}
        self.adj = _neighbours(profile, self.present)
        self.hosts = [
            t for t in profile.tables if t.name in self.present and store.schema.table(t.name).vector_columns
        ]

    def max_joins(self, host: str) -> int:
        n = 0
        while _join_paths(host, n + 1, self.adj):
            n += 1
        return n

    def feasible(self, target: ComplexityTarget) -> list[tuple[TableProfile, _Combo]]:
        out = []
        for host in self.hosts:
            for combo in _combos(target.integration, self.max_joins(host.name)):
                cost = combo.cost(self.rubric)
                if self.rubric.tier(cost) is not target.structural:
                    continue
                if target.structural is Structural.EXTRA_HARD and cost > MAX_EXTRA_HARD_COST:
                    continue
                out.append((host, combo))
        return out

    def vec_op(self, rng: np.random.Generator, table: str, intent: Intent, k: int) -> _VecOp:
        tdef = self.store.schema.table(table)
        vc = tdef.vector_columns[int(rng.integers(len(tdef.vector_columns)))]
        return _VecOp(table, vc.name, vc.metric, _keyword(rng, self.profile, intent), k)

    def nested_options(self, tables: list[str], grouped: bool) -> list[tuple[str, str, str, str]]:
        """(outer table, outer col, inner table, inner col) pairs usable as IN filters."""
        out = []
        for t in tables:
            pk = self.store.schema.table(t).primary_key
            if not grouped:
                out.append((t, pk, t, pk))
            for e in self.profile.edges:
                if e.parent not in self.present or e.child not in self.present:
                    continue
                if e.parent == t:
                    out.append((t, e.pk, e.child, e.fk))
                elif e.child == t and not grouped:
                    out.append((t, e.fk, e.parent, e.pk))
        return out

    def pred(self, rng: np.random.Generator, table: str) -> _Pred:
        prof = self.profile.table(table)
        f = prof.filters[int(rng.integers(len(prof.filters)))]
        return _Pred(table, f, f.values[int(rng.integers(len(f.values)))])

    def plan(self, rng: np.random.Generator, target: ComplexityTarget) -> _Plan:
        options = self.feasible(target)
        if not options:
            raise UnsatisfiableTargetError(
                f"schema cannot host ({target.structural.value}, {target.integration.value})"
            )
        host, combo = options[int(rng.integers(len(options)))]
        paths = _join_paths(host.name, combo.joins, self.adj)
        path = paths[int(rng.integers(len(paths)))]
        joins = [(self.profile.table(t), e) for t, e in path]
        tables = [host.name] + [t for t, _ in path]
        k = int(rng.choice([5, 10]))
        vec = self.vec_op(rng, host.name, target.intent, k)
        extra = [self.vec_op(rng, host.name, target.intent, int(rng.choice([20, 50]))) for _ in range(target.vector_ops - 1)]

        preds: list[_Pred] = []
        phrases: list[str] = []
        if target.integration is Integration.WHERE:
            n_preds = int(rng.integers(1, 3))
            for _ in range(n_preds):
                preds.append(self.pred(rng, host.name))
        elif target.integration is Integration.JOIN:
            joined = [t for t in tables[1:]]
            preds.append(self.pred(rng, joined[int(rng.integers(len(joined)))]))
            if rng.random() < 0.5:
                preds.append(self.pred(rng, host.name))
        elif rng.random() < 0.5:
            preds.append(self.pred(rng, tables[int(rng.integers(len(tables)))]))
        preds = list(dict.fromkeys(preds))
        phrases += [_value_phrase(p.filter, p.value) for p in preds]

        nested: list[_Nested] = []
        plain = self.nested_options(tables, grouped=False)
        drawn: set = set()
        for i in range(combo.nested_in + combo.cte_filter):
            for _ in range(8):
                o_t, o_c, i_t, i_c = plain[int(rng.integers(len(plain)))]
                p = self.pred(rng, i_t)
                if (o_c, i_t, i_c, p) not in drawn:
                    break
            else:
                raise UnsatisfiableTargetError("not enough distinct nested filters")
            drawn.add((o_c, i_t, i_c, p))
            cte = f"{i_t}_subset{i + 1}" if i >= combo.nested_in else None
            nested.append(_Nested(o_t, o_c, i_t, i_c, p, cte))
            noun = self.profile.table(i_t).noun
            phrases.append(f"linked to {noun} {_value_phrase(p.filter, p.value)}")
        if combo.group_cte:
            grouped = self.nested_options(tables, grouped=True)
            if not grouped:
                raise UnsatisfiableTargetError("no grouping edge available")
            o_t, o_c, i_t, i_c = grouped[int(rng.integers(len(grouped)))]
            m = int(rng.choice([2, 3]))
            nested.append(_Nested(o_t, o_c, i_t, i_c, None, f"busy_{o_t}", m))
            phrases.append(f"with at least {m} related {self.profile.table(i_t).noun}")

        plan = _Plan(target.integration, host, self.store.schema.table(host.name).primary_key, vec, extra,
                     joins, preds, nested)
        if combo.agg == "group":
            keys = [(t, c) for t in tables for c in self.profile.table(t).group_keys]
            if not keys:
                raise UnsatisfiableTargetError("no grouping key available")
            plan.agg = "group"
            plan.group_key = keys[int(rng.integers(len(keys)))]
            if combo.having:
                plan.having = int(rng.choice([1, 2]))
        elif combo.agg == "agg":
            plan.agg = "agg"

        plan.question = self._question(plan, phrases)
        return plan

    def _question(self, plan: _Plan, phrases: list[str]) -> str:
        v = plan.vec
        noun = plan.host.noun
        base = f"the {v.k} {noun} most related to \"{v.keyword}\""
        for e in plan.extra_vecs:
            base += f" that are also among the {e.k} closest to \"{e.keyword}\""
        tail = (" " + " and ".join(phrases)) if phrases else ""
        if plan.agg == "agg":
            return f"Among {base}{tail}, how many are there?"
        if plan.agg == "group":
            gt, gc = plan.group_key
            cond = f" keeping groups with at least {plan.having}" if plan.having else ""
            return f"Among {base}{tail}, count them per {gt} {gc}{cond}."
        joined = "".join(f" with their {t.name} {t.display[0]}" for t, _ in plan.joins)
        return f"Find {base}{tail}{joined}."


@dataclass(frozen=True)
class SynthResult:
    query: A.Select
    sql: str
    variants: tuple[str, ...]
    question: str
    keywords: tuple[str, ...]
    top_k: int
    target: ComplexityTarget


def _synthesize(
    store: HybridStore,
    target: ComplexityTarget,
    seed: int,
    profile: SchemaProfile,
    rubric: Rubric,
    embedder: Optional[Embedder],
    n_variants: int,
    exclude: Optional[set[str]] = None,
) -> SynthResult:
    builder = _Builder(store, profile, rubric)
    if not builder.feasible(target):
        raise UnsatisfiableTargetError(
            f"schema cannot host ({target.structural.value}, {target.integration.value})"
        )
    for attempt in range(MAX_ATTEMPTS):
        rng = np.random.default_rng(derive_seed(seed, target.structural.value, target.integration.value,
                                                target.intent.value, target.vector_ops, attempt))
        try:
            plan = builder.plan(rng, target)
        except UnsatisfiableTargetError:
            continue
        query = parse(plan.sql(0))
        if validate_query(query, store.schema):
            continue
        label = classify(query, target.intent, rubric)
        if label.cell != (target.structural, target.integration):
            continue
        if exclude is not None and canonical_template(query) in exclude:
            continue
        try:
            if not execute(store, query, PreFilter(), embedder=embedder).rows:
                continue
        except VectorSqlError:
            continue
        variants = tuple(dict.fromkeys(render(parse(plan.sql(s))) for s in range(max(1, n_variants))))
        return SynthResult(query, render(query), variants, plan.question, tuple(A.embed_texts(query)),
                           plan.vec.k, target)
    raise UnsatisfiableTargetError(
        f"no non-empty query for ({target.structural.value}, {target.integration.value}) "
        f"after {MAX_ATTEMPTS} attempts"
    )


def synthesize_query(
    store: HybridStore,
    target: ComplexityTarget,
    seed: int,
    profile: SchemaProfile = SCHOLAR_PROFILE,
    rubric: Rubric = DEFAULT_RUBRIC,
    embedder: Optional[Embedder] = None,
) -> A.Select:
    """A validated query whose label matches ``target`` and whose PreFilter result is non-empty."""
    return _synthesize(store, target, seed, profile, rubric, embedder, 1).query


def synthesize(
    store: HybridStore,
    target: ComplexityTarget,
    seed: int,
    profile: SchemaProfile = SCHOLAR_PROFILE,
    rubric: Rubric = DEFAULT_RUBRIC,
    embedder: Optional[Embedder] = None,
    n_variants: int = 3,
    exclude: Optional[set[str]] = None,
) -> SynthResult:
    """Like :func:`synthesize_query` but also returns variants, question and keywords."""
    return _synthesize(store, target, seed, profile, rubric, embedder, n_variants, exclude)


ALL_CELLS: tuple[tuple[Structural, Integration], ...] = tuple(itertools.product(Structural, Integration))


def generate_workload(
    store: HybridStore,
    cells: Sequence[tuple[Union[ComplexityTarget, tuple], int]],
    seed: int,
    profile: SchemaProfile = SCHOLAR_PROFILE,
    rubric: Rubric = DEFAULT_RUBRIC,
    embedder: Optional[Embedder] = None,
    n_variants: int = 3,
) -> list[BenchmarkSample]:
    """Samples for each (target, count); queries are unique by literal-free template."""
    from .select import build_golden

    samples: list[BenchmarkSample] = []
    seen: set[str] = set()
    for cell_no, (target, count) in enumerate(cells):
        if not isinstance(target, ComplexityTarget):
            target = ComplexityTarget(*target)
        for j in range(count):
            res = synthesize(store, target, derive_seed(seed, cell_no, j), profile, rubric, embedder,
                             n_variants, exclude=seen)
            seen.add(canonical_template(res.query))
            golden = build_golden(store, [parse(v) for v in res.variants], embedder=embedder)
            label = classify(res.query, target.intent, rubric)
            samples.append(
                BenchmarkSample(
                    id=f"q{len(samples):05d}",
                    question=res.question,
                    sql=res.sql,
                    golden=golden,
                    label=label,
                    keywords=res.keywords,
                    top_k=res.top_k,
                    variants=res.variants,
                )
            )
    return samples
