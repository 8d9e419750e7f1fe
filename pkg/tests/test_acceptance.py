"""Acceptance criteria, one test each.

Each test records a ``criterion`` name and a ``detail`` string; conftest
prints one PASS/FAIL line per criterion in the terminal summary.
"""

import dataclasses
import math
import sqlite3
from pathlib import Path

import numpy as np
import pytest

from conftest import ann_fixture
from vectorsql import ast as A
from vectorsql.cli import main
from vectorsql.embedding import HashEmbedder
from vectorsql.engine.executor import execute, measure_recall
from vectorsql.engine.strategy import Iterative, PostFilter, PreFilter
from vectorsql.index.exact import ExactStore, knn_exact
from vectorsql.index.hnsw import AnnIndex, ann_search
from vectorsql.metrics import acc_sql, ndcg_at_k, rrf_scores, set_scores
from vectorsql.model import ComplexityLabel, Integration, Structural
from vectorsql.sql.parser import parse
from vectorsql.sql.render import quote_string, render
from vectorsql.sql.transpile import transpile
from vectorsql.workload.complexity import classify
from vectorsql.workload.fixtures import degradation_fixture
from vectorsql.workload.scholar import ScholarSizes, scholar_store
from vectorsql.workload.select import stratified_sample
from vectorsql.workload.synth import ALL_CELLS, ComplexityTarget, generate_workload, synthesize_query
from vectorsql.workload.vocab import COUNTRIES, TIERS, TOPICS

GOLDEN = Path(__file__).parent / "fixtures" / "transpile"


@pytest.fixture(scope="module")
def gen_store():
    return scholar_store(0, ScholarSizes(venues=40, papers=400, authors=200))


@pytest.fixture(scope="module")
def generated(gen_store):
    """200 generated queries spread over the twelve cells."""
    out = []
    for n in range(200):
        s, i = ALL_CELLS[n % len(ALL_CELLS)]
        out.append(synthesize_query(gen_store, ComplexityTarget(s, i), seed=1000 + n))
    return out


# 1: PreFilter against an independent evaluator

def _oracle_db(store):
    db = sqlite3.connect(":memory:")
    db.execute("PRAGMA case_sensitive_like = ON")
    for t in store.schema.tables:
        cols = [c.name for c in t.columns]
        db.execute(f"CREATE TABLE {t.name} ({', '.join(cols)})")
        db.executemany(f"INSERT INTO {t.name} VALUES ({', '.join('?' * len(cols))})", store.table(t.name).rows)
    return db


def _random_query(rng, words):
    def atom():
        kind = rng.integers(0, 10)
        if kind == 0:
            return f"p.year >= {rng.integers(2000, 2025)}"
        if kind == 1:
            lo = int(rng.integers(2000, 2020))
            return f"p.year BETWEEN {lo} AND {lo + int(rng.integers(0, 6))}"
        if kind == 2:
            return f"p.citations < {rng.integers(0, 300)}"
        if kind == 3:
            return f"p.is_open = {'TRUE' if rng.integers(0, 2) else 'FALSE'}"
        if kind == 4:
            return f"p.score > {rng.uniform(0, 1):.3f}"
        if kind == 5:
            return "p.score IS NULL" if rng.integers(0, 2) else "p.score IS NOT NULL"
        if kind == 6:
            return f"p.title LIKE {quote_string('%' + words[int(rng.integers(len(words)))] + '%')}"
        if kind == 7:
            ids = sorted({int(x) for x in rng.integers(1, 41, size=5)})
            return f"p.venue_id IN ({', '.join(map(str, ids))})"
        if kind == 8:
            return f"NOT p.year > {rng.integers(2005, 2024)}"
        return f"p.citations + p.year * 0 >= {rng.integers(0, 200)}"

    joins, atoms = [], [atom() for _ in range(int(rng.integers(1, 4)))]
    shape = rng.integers(0, 3)
    if shape >= 1:
        joins.append("JOIN venues AS v ON v.id = p.venue_id")
        atoms.append(f"v.tier = '{TIERS[int(rng.integers(len(TIERS)))]}'" if rng.integers(0, 2)
                     else f"v.country != '{COUNTRIES[int(rng.integers(len(COUNTRIES)))]}'")
    if shape == 2:
        joins += ["JOIN writes AS w ON w.paper_id = p.id", "JOIN authors AS a ON a.id = w.author_id"]
        atoms.append(f"a.h_index > {rng.integers(0, 60)}")
    glue = " OR " if rng.integers(0, 4) == 0 else " AND "
    where = glue.join(f"({x})" for x in atoms)
    col, metric = ("abstract", "L2") if rng.integers(0, 2) else ("title", "COSINE")
    kw = words[int(rng.integers(len(words)))]
    k = int(rng.integers(1, 25))
    proj = "p.id, w.id" if shape == 2 else "p.id"
    from_ = " ".join(["papers AS p"] + joins)
    filt = f"SELECT {proj} FROM {from_} WHERE {where}"
    vsql = f"{filt} ORDER BY DISTANCE(p.{col}_vec, EMBED({quote_string(kw)}){', COSINE' if metric == 'COSINE' else ''}) LIMIT {k}"
    return vsql, filt, col, metric, kw, k


def test_oracle_equivalence(record_property):
    record_property("criterion", "1 oracle equivalence")
    store = scholar_store(7, ScholarSizes(venues=40, papers=2000, authors=800))
    assert max(len(store.table(t.name).ids) for t in store.schema.tables) <= 10_000
    db = _oracle_db(store)
    emb = HashEmbedder()
    papers = store.table("papers")
    cols = [c.name for c in papers.table.columns]
    texts = {c: [r[cols.index(c)] or "" for r in papers.rows] for c in ("abstract", "title")}
    vecs = {c: np.vstack([emb.embed_array(t) for t in texts[c]]) for c in texts}
    pos = {pid: i for i, pid in enumerate(papers.ids)}
    words = sorted({w for t in TOPICS for w in t.words} | {"Graph", "the"})
    rng = np.random.default_rng(20240601)
    mismatches, nonempty = [], 0
    for n in range(200):
        vsql, filt, col, metric, kw, k = _random_query(rng, words)
        q = emb.embed_array(kw)
        rows = db.execute(filt).fetchall()
        M = vecs[col]
        if metric == "L2":
            full = np.sqrt(((M - q) ** 2).sum(axis=1))
        else:
            full = 1.0 - (M @ q) / (np.linalg.norm(M, axis=1) * np.linalg.norm(q))
        d = [float(full[pos[r[0]]]) for r in rows]
        want = [tuple(r) for _, r in sorted(zip(d, rows))[:k]]
        got = [tuple(r.values) for r in execute(store, vsql, PreFilter()).rows]
        nonempty += bool(want)
        if got != want:
            mismatches.append(vsql)
    record_property("detail", f"200 queries, {nonempty} non-empty, {len(mismatches)} mismatches")
    assert nonempty >= 150
    assert mismatches == []


# 2: recall degradation on the fixture

def test_recall_degradation(record_property):
    record_property("criterion", "2 recall degradation")
    fx = degradation_fixture(seed=0)
    strategies = {"pre": PreFilter(), "post": PostFilter(multiplier=1), "iter": Iterative()}
    recall = {s: {i: [] for i in Integration} for s in strategies}
    for sample in fx.samples:
        truth = execute(fx.store, sample.sql)
        for name, strat in strategies.items():
            m = measure_recall(fx.store, sample.sql, strat, truth=truth)
            recall[name][sample.label.integration].append(m.recall)
    mean = {s: {i.value: float(np.mean(v)) for i, v in cells.items()} for s, cells in recall.items()}
    gap = mean["post"]["Non"] - mean["post"]["Join"]
    record_property("detail", f"post Non={mean['post']['Non']:.3f} Where={mean['post']['Where']:.3f} "
                              f"Join={mean['post']['Join']:.3f} gap={gap:.3f}; iter Join={mean['iter']['Join']:.3f}")
    assert gap >= 0.30
    assert all(v == 1.0 for v in mean["pre"].values())
    assert all(mean["iter"][c] >= mean["post"][c] for c in mean["post"])
    for i in Integration:
        assert all(a >= b for a, b in zip(recall["iter"][i], recall["post"][i]))


# 3: metric unit values

def test_metric_units(record_property):
    record_property("criterion", "3 metric unit suite")
    p, r, f = set_scores({1, 2, 3}, {2, 3, 4})
    assert all(abs(x - 2 / 3) <= 1e-9 for x in (p, r, f))
    assert abs(ndcg_at_k([0, 1, 2], {1, 2}, 3) - 0.6934) <= 1e-4
    assert ndcg_at_k([1, 2, 3], {1, 2, 3}, 3) == 1.0
    assert ndcg_at_k([5, 6, 7, 8], {5, 6, 7, 8, 9}, 4) == 1.0
    s = rrf_scores([["x", "a", "b"], ["c", "d", "x"]], c=60)["x"]
    assert abs(s - (1 / 61 + 1 / 63)) <= 1e-12
    record_property("detail", f"ndcg={ndcg_at_k([0, 1, 2], {1, 2}, 3):.6f} rrf_err={abs(s - (1 / 61 + 1 / 63)):.1e}")


# 4: transpiler golden files and parse/render identity

def test_transpiler_goldens(record_property, gen_store):
    record_property("criterion", "4 transpiler goldens")
    import json

    checked = 0
    for case in sorted(p for p in GOLDEN.iterdir() if p.is_dir()):
        q = parse((case / "query.sql").read_text())
        vectors = json.loads((case / "vectors.json").read_text())
        for dialect, markers in (("pgvector", ("<->", "<=>", "<#>")),
                                 ("clickhouse", ("L2Distance(", "cosineDistance(", "dotProduct(")),
                                 ("sqlite-vec", ("MATCH",))):
            f = case / f"{dialect}.sql"
            if f.exists():
                text = transpile(q, dialect, vectors).sql + "\n"
                assert text == f.read_text(), (case.name, dialect)
                assert any(m in text for m in markers)
                checked += 1
    assert "<->" in (GOLDEN / "basic" / "pgvector.sql").read_text()
    assert "L2Distance" in (GOLDEN / "basic" / "clickhouse.sql").read_text()
    samples = generate_workload(gen_store, [(c, 2) for c in ALL_CELLS], seed=4)
    queries = [parse(s.sql) for s in samples] + [parse(v) for s in samples for v in s.variants]
    for q in queries:
        assert parse(render(q)) == q
    record_property("detail", f"{checked} golden files, {len(queries)} round-tripped queries")


# 5: graph index quality

def test_ann_quality(record_property):
    record_property("criterion", "5 ANN quality")
    X, Q = ann_fixture()
    index, exact = AnnIndex.build(range(len(X)), X), ExactStore(range(len(X)), X)

    def recall(ef):
        hits = sum(len({i for i, _ in ann_search(index, q, 10, ef)} & {i for i, _ in knn_exact(exact, q, 10)})
                   for q in Q)
        return hits / (10 * len(Q))

    r64, rfull = recall(64), recall(len(X))
    record_property("detail", f"recall@10 ef=64 {r64:.3f}, ef=n {rfull:.3f}")
    assert r64 >= 0.90
    assert rfull == 1.0


# 6: determinism of bench output

def test_bench_determinism(record_property, tmp_path):
    record_property("criterion", "6 determinism")
    args = ["bench", "--fixture", "degradation", "--strategies", "pre;post;iter", "--k-prime", "1,4", "--seed", "0"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--workers", "3"]) == 0
    a, b = (tmp_path / "a" / "aggregate.csv").read_bytes(), (tmp_path / "b" / "aggregate.csv").read_bytes()
    record_property("detail", f"{len(a)} bytes, identical={a == b}")
    assert a == b


# 7: generator coverage

def test_generator_coverage(record_property, gen_store):
    record_property("criterion", "7 generator coverage")
    for seed in range(3):
        for s, i in ALL_CELLS:
            q = synthesize_query(gen_store, ComplexityTarget(s, i), seed)
            assert classify(q).cell == (s, i)
    samples = generate_workload(gen_store, [(c, 3) for c in ALL_CELLS], seed=9)
    mismatched = [s.id for s in samples if classify(parse(s.sql)).cell != s.label.cell]
    targets = [c for c in ALL_CELLS for _ in range(3)]
    assert [s.label.cell for s in samples] == targets
    assert mismatched == []
    pool = [(s.id, s.label) for s in samples]
    sel = stratified_sample(pool, 2, seed=5)
    assert sel.counts == {c: 2 for c in ALL_CELLS} and sel.shortfall == {}
    quota = {c: n % 4 for n, c in enumerate(ALL_CELLS)}
    sel = stratified_sample(pool, quota, seed=6)
    assert sel.counts == quota and sel.shortfall == {}
    record_property("detail", f"12 cells x 3 seeds, {len(samples)} workload samples classified")


# 8: ACC_SQL properties

def _rewrite(node, fn):
    node = fn(node)
    if dataclasses.is_dataclass(node) and not isinstance(node, type):
        changes = {}
        for f in dataclasses.fields(node):
            v = getattr(node, f.name)
            nv = tuple(_rewrite(x, fn) for x in v) if isinstance(v, tuple) else _rewrite(v, fn)
            if nv is not v:
                changes[f.name] = nv
        return dataclasses.replace(node, **changes) if changes else node
    return node


def _once(fn):
    """Apply ``fn`` to the first node it changes, then stop."""
    done = []

    def g(n):
        if done:
            return n
        out = fn(n)
        if out is not n:
            done.append(True)
        return out

    return g, done


def _drop_join(n):
    if isinstance(n, A.FromClause) and n.joins:
        return dataclasses.replace(n, joins=n.joins[:-1])
    return n


_AGG_SWAP = {"COUNT": "MAX", "MAX": "MIN", "MIN": "MAX", "SUM": "AVG", "AVG": "SUM"}


def _change_aggregate(n):
    if isinstance(n, A.FuncCall) and n.name.upper() in _AGG_SWAP:
        return dataclasses.replace(n, name=_AGG_SWAP[n.name.upper()])
    return n


def _flip_comparison(n):
    flips = {">": "<=", ">=": "<", "<": ">=", "<=": ">", "=": "!=", "!=": "="}
    if isinstance(n, A.BinaryOp) and n.op in flips:
        return dataclasses.replace(n, op=flips[n.op])
    return n


def test_acc_sql_properties(record_property, generated, gen_store):
    record_property("criterion", "8 ACC_SQL properties")
    schema = gen_store.schema
    assert all(acc_sql(q, q, schema) == 1 for q in generated)
    embed_mut = lambda n: dataclasses.replace(n, text=n.text + " and more") if isinstance(n, A.EmbedText) else n
    for q in generated:
        assert acc_sql(_rewrite(q, embed_mut), q, schema) == 1
    applied = {"drop-join": 0, "change-aggregate": 0, "flip-comparison": 0}
    for q in generated:
        for name, fn in (("drop-join", _drop_join), ("change-aggregate", _change_aggregate),
                         ("flip-comparison", _flip_comparison)):
            g, done = _once(fn)
            mutated = _rewrite(q, g)
            if not done:
                continue
            applied[name] += 1
            assert acc_sql(mutated, q, schema) == 0, (name, render(q))
    record_property("detail", "reflexive 200/200, embed-invariant 200/200, mutations " +
                    ", ".join(f"{k}={v}" for k, v in applied.items()))
    assert all(v >= 20 for v in applied.values())
