import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import tiny_schema, tiny_store
from vectorsql.engine.executor import execute, execute_plain_sql, measure_recall
from vectorsql.engine.store import HybridStore, IndexParams
from vectorsql.engine.strategy import Iterative, PostFilter, PreFilter, parse_strategy
from vectorsql.errors import QueryTimeoutError, TypeMismatchError

FILTERED = "SELECT id, name FROM items WHERE grp = 1 ORDER BY DISTANCE(vec, [0, 0]) LIMIT 1"


def names(rs):
    return [r.values[-1] if len(r.values) == 1 else r.values[1] for r in rs.rows]


# strategies on the three-row instance

def test_prefilter_takes_nearest_survivor(store):
    rs = execute(store, FILTERED, PreFilter())
    assert [r.values for r in rs.rows] == [(1, "A")]
    assert rs.rows[0].distance == 2.0
    assert not rs.truncated


def test_postfilter_loses_rows_when_nearest_fails(store):
    rs = execute(store, FILTERED, PostFilter(k_prime=1))
    assert len(rs) == 0
    assert rs.truncated


def test_iterative_recovers_prefilter(store):
    assert execute(store, FILTERED, Iterative(batch=1, max_scans=3)).rows == execute(store, FILTERED).rows


def test_measure_recall(store):
    assert measure_recall(store, FILTERED, PreFilter()).recall == 1.0
    assert measure_recall(store, FILTERED, PostFilter(k_prime=1)).recall == 0.0
    assert measure_recall(store, FILTERED, PostFilter(k_prime=3)).recall == 1.0
    with pytest.raises(ValueError):
        measure_recall(store, "SELECT name FROM items", PreFilter())


def test_strategy_parsing_and_bounds(store):
    assert str(parse_strategy("post")) == "post:x4"
    assert str(parse_strategy("post:7")) == "post:7"
    assert str(parse_strategy("post:x2.5")) == "post:x2.5"
    assert str(parse_strategy("iter:3,4")) == "iter:3,4"
    assert PostFilter(multiplier=1.5).candidates(3) == 5
    for bad in ("post:x0.5", "iter:0,1", "iter:1,0", "bogus"):
        with pytest.raises(ValueError):
            parse_strategy(bad)
    with pytest.raises(ValueError):
        execute(store, "SELECT id FROM items ORDER BY DISTANCE(vec, [0, 0]) LIMIT 3", PostFilter(k_prime=2))


# relational semantics

def test_count_star(store):
    assert execute_plain_sql(store, "SELECT COUNT(*) FROM tags").rows[0].values == (3,)
    assert execute_plain_sql(store, "SELECT COUNT(price), COUNT(*) FROM items").rows[0].values == (2, 3)


def test_inner_join_one_match():
    schema = tiny_schema()
    rows = {
        "items": [{"id": 1, "name": "A", "grp": 1, "price": 1.0, "ok": True},
                  {"id": 2, "name": "B", "grp": 2, "price": 1.0, "ok": True}],
        "tags": [{"id": 10, "item_id": 2, "label": "x"}, {"id": 11, "item_id": 9, "label": "y"}],
    }
    s = HybridStore.from_rows(schema, rows, {("items", "vec"): {1: [1.0, 0.0], 2: [0.0, 1.0]}})
    rs = execute_plain_sql(s, "SELECT i.name, t.label FROM items AS i JOIN tags AS t ON t.item_id = i.id")
    assert [r.values for r in rs.rows] == [("B", "x")]


def test_left_join_null_fill(store):
    rs = execute_plain_sql(store, "SELECT i.name, t.label FROM items AS i LEFT JOIN tags AS t ON t.item_id = i.id")
    assert [r.values for r in rs.rows] == [("A", "red"), ("A", "blue"), ("B", None), ("C", "red")]


def test_three_valued_logic(store):
    q = lambda w: [r.values[0] for r in execute_plain_sql(store, f"SELECT name FROM items WHERE {w}").rows]
    assert q("price > 6") == ["A"]
    assert q("NOT price > 6") == ["C"]
    assert q("price > 6 OR price IS NULL") == ["A", "B"]
    assert q("price = NULL") == []
    assert q("price > 100 OR TRUE") == ["A", "B", "C"]
    assert q("price IN (10, NULL)") == ["A"]
    assert q("NOT price IN (10, NULL)") == []


def test_arithmetic_and_like(store):
    rs = execute_plain_sql(store, "SELECT name, price * 2, price / 0, grp + 1 FROM items")
    assert [r.values for r in rs.rows] == [("A", 20.0, None, 2), ("B", None, None, 2), ("C", 11.0, None, 3)]
    likes = execute_plain_sql(store, "SELECT label FROM tags WHERE label LIKE 'b%' OR label LIKE '_e_'")
    assert [r.values[0] for r in likes.rows] == ["red", "blue", "red"]
    assert len(execute_plain_sql(store, "SELECT label FROM tags WHERE label LIKE 'R%'")) == 0


def test_order_by_puts_nulls_first_ascending(store):
    rs = execute_plain_sql(store, "SELECT name FROM items ORDER BY price")
    assert [r.values[0] for r in rs.rows] == ["B", "C", "A"]
    rs = execute_plain_sql(store, "SELECT name FROM items ORDER BY price DESC")
    assert [r.values[0] for r in rs.rows] == ["A", "C", "B"]


def test_group_by_having(store):
    rs = execute_plain_sql(store, "SELECT grp, COUNT(*) AS n FROM items GROUP BY grp HAVING COUNT(*) > 1")
    assert [r.values for r in rs.rows] == [(1, 2)]


def test_type_mismatch(store):
    with pytest.raises(TypeMismatchError):
        execute_plain_sql(store, "SELECT name FROM items WHERE name > 3")
    with pytest.raises(ValueError):
        execute_plain_sql(store, FILTERED)


def test_timeout(scholar):
    sql = "SELECT COUNT(*) FROM papers AS p JOIN writes AS w ON w.paper_id = p.id JOIN authors AS a ON a.id = w.author_id"
    with pytest.raises(QueryTimeoutError):
        execute(scholar, sql, timeout=1e-9)


def test_vector_clause_in_cte(store):
    sql = ("WITH knn AS (SELECT id FROM items ORDER BY DISTANCE(vec, [0, 0]) LIMIT 2) "
           "SELECT name FROM items WHERE id IN (SELECT id FROM knn)")
    assert [r.values[0] for r in execute(store, sql).rows] == ["A", "C"]


def test_store_snapshot_round_trip(tmp_path, scholar):
    scholar.index("papers", "abstract_vec")
    scholar.save(tmp_path / "s")
    back = HybridStore.load(tmp_path / "s")
    assert back.has_index("papers", "abstract_vec")
    assert not back.has_index("authors", "bio_vec")
    sql = "SELECT id FROM papers WHERE year > 2015 ORDER BY DISTANCE(abstract_vec, EMBED('graph')) LIMIT 10"
    for strat in (PreFilter(), PostFilter(), Iterative()):
        assert execute(back, sql, strat) == execute(scholar, sql, strat)
    back.index("authors", "bio_vec")
    assert back.has_index("authors", "bio_vec")


# randomized oracle properties; stores are small enough that the graph
# search at the default beam visits every node, so candidates are exact

point = st.tuples(st.integers(-20, 20), st.integers(-20, 20))
table = st.lists(st.tuples(point, st.integers(0, 3)), min_size=1, max_size=40)


def make_store(rows):
    data = [{"id": i + 1, "name": f"n{i}", "grp": g, "price": float(i), "ok": g % 2 == 0}
            for i, (_, g) in enumerate(rows)]
    vecs = {i + 1: [float(x), float(y)] for i, ((x, y), _) in enumerate(rows)}
    return HybridStore.from_rows(tiny_schema(), {"items": data, "tags": []}, {("items", "vec"): vecs},
                                 IndexParams(m=4, ef_construction=16))


@given(table, point, st.integers(0, 3), st.integers(1, 8))
def test_prefilter_equals_brute_force(rows, q, g, k):
    s = make_store(rows)
    sql = f"SELECT id FROM items WHERE grp >= {g} ORDER BY DISTANCE(vec, [{q[0]}, {q[1]}]) LIMIT {k}"
    cand = [(math.dist(p, q), i + 1) for i, (p, grp) in enumerate(rows) if grp >= g]
    want = [i for _, i in sorted(cand)[:k]]
    assert [r.values[0] for r in execute(s, sql).rows] == want


@given(table, point, st.integers(0, 3), st.integers(1, 5), st.integers(1, 5), st.integers(0, 10))
def test_postfilter_properties(rows, q, g, k, m1, extra):
    s = make_store(rows)
    sql = f"SELECT id, grp FROM items WHERE grp = {g} ORDER BY DISTANCE(vec, [{q[0]}, {q[1]}]) LIMIT {k}"
    small, large = PostFilter(k_prime=k * m1), PostFilter(k_prime=k * m1 + extra)
    rs = execute(s, sql, small)
    assert all(r.values[1] == g for r in rs.rows)
    assert len(rs) <= k
    assert measure_recall(s, sql, large).recall >= measure_recall(s, sql, small).recall
    assert execute(s, sql, PostFilter(k_prime=len(rows) + k)).rows == execute(s, sql).rows


@given(table, point, st.integers(1, 5))
def test_strategies_agree_without_filter(rows, q, k):
    s = make_store(rows)
    sql = f"SELECT id FROM items ORDER BY DISTANCE(vec, [{q[0]}, {q[1]}]) LIMIT {k}"
    pre = execute(s, sql)
    assert execute(s, sql, PostFilter(k_prime=k)).ids == pre.ids
    assert execute(s, sql, Iterative(1, 1)).ids == pre.ids
