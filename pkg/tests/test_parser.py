import pytest
from hypothesis import given
from hypothesis import strategies as st

from vectorsql import ast as A
from vectorsql.errors import ParseError, SqlSyntaxError, UnsupportedConstructError
from vectorsql.model import Metric
from vectorsql.sql.parser import parse, parse_expression
from vectorsql.sql.render import render, render_expr


def test_paper_style_query_has_one_vector_clause():
    q = parse("SELECT title FROM papers ORDER BY DISTANCE(abstract_vec, EMBED('query optimization techniques')) LIMIT 5")
    assert q.vector is not None
    assert q.vector.k == 5
    assert q.vector.target == A.EmbedText("query optimization techniques")
    assert q.vector.metric is Metric.L2
    assert q.limit is None and q.order_by == ()


def test_select_constant_has_no_vector_clause():
    q = parse("SELECT 1")
    assert q.vector is None and q.from_ is None
    assert A.vector_clauses(q) == []


def test_truncated_input_reports_position():
    with pytest.raises(SqlSyntaxError) as info:
        parse("SELECT * FROM t ORDER BY DISTANCE(")
    assert info.value.line == 1
    assert info.value.column >= len("SELECT * FROM t ORDER BY DISTANCE(")


def test_multiline_position():
    with pytest.raises(SqlSyntaxError) as info:
        parse("SELECT a\nFROM t\nWHERE a = = 2")
    assert info.value.line == 3


@pytest.mark.parametrize(
    "sql",
    [
        "SELECT a FROM t UNION SELECT a FROM u",
        "WITH RECURSIVE r AS (SELECT 1) SELECT * FROM r",
        "SELECT a FROM t RIGHT JOIN u ON t.a = u.a",
        "SELECT a FROM t, u",
        "SELECT ROW_NUMBER() OVER (ORDER BY a) FROM t",
        "SELECT CASE WHEN a THEN 1 END FROM t",
        "SELECT a FROM t WHERE EXISTS (SELECT 1)",
        "SELECT (SELECT 1) FROM t",
        "SELECT a FROM t LIMIT 5 OFFSET 2",
        "DELETE FROM t",
        "SELECT a FROM t ORDER BY DISTANCE(v, EMBED('x'))",
        "SELECT a FROM t ORDER BY DISTANCE(v, EMBED('x')), a LIMIT 3",
        "SELECT a FROM t ORDER BY DISTANCE(v, EMBED('x')) DESC LIMIT 3",
        "SELECT DISTANCE(v, EMBED('x')) FROM t",
    ],
)
def test_constructs_outside_the_grammar_are_rejected(sql):
    with pytest.raises(UnsupportedConstructError):
        parse(sql)


def test_second_vector_ordering_at_one_level_is_rejected():
    with pytest.raises(ParseError):
        parse("SELECT a FROM t ORDER BY DISTANCE(v, EMBED('x')), DISTANCE(w, EMBED('y')) LIMIT 3")


def test_vector_literal_and_metric():
    q = parse("SELECT id FROM t ORDER BY DISTANCE(t.v, [1, -2.5, 3e2], COSINE) LIMIT 2")
    assert q.vector.target == A.VectorLiteral((1.0, -2.5, 300.0))
    assert q.vector.metric is Metric.COSINE
    assert q.vector.column == A.ColumnRef("t", "v")


def test_ctes_joins_grouping():
    q = parse(
        "WITH knn AS (SELECT id FROM papers ORDER BY DISTANCE(abstract_vec, EMBED('x')) LIMIT 10) "
        "SELECT v.name, COUNT(*) AS n FROM papers AS p JOIN venues v ON v.id = p.venue_id "
        "LEFT JOIN writes AS w ON w.paper_id = p.id WHERE p.id IN (SELECT id FROM knn) "
        "GROUP BY v.name HAVING COUNT(*) >= 2 ORDER BY n DESC LIMIT 3"
    )
    assert [c.name for c in q.ctes] == ["knn"]
    assert [j.kind for j in q.from_.joins] == ["INNER", "LEFT"]
    assert q.limit == 3 and q.order_by[0].descending
    kinds = [ctx.kind for ctx in A.iter_selects(q)]
    assert kinds == ["top", "cte", "in"]


def test_not_equal_spellings_and_keywords_case():
    assert parse_expression("a <> 1") == parse_expression("a != 1")
    assert parse("select A from T where x is not null") == parse("SELECT A FROM T WHERE x IS NOT NULL")


def test_render_is_stable():
    sql = "SELECT p.title FROM papers AS p WHERE p.year >= 2015 AND NOT p.is_open ORDER BY DISTANCE(p.abstract_vec, EMBED('it''s')) LIMIT 5"
    q = parse(sql)
    assert render(q) == sql
    assert parse(render(q)) == q


def test_quoted_identifiers_round_trip():
    q = parse('SELECT "select", "a b" FROM "order"')
    assert parse(render(q)) == q
    assert '"select"' in render(q)


# expression round trip

names = st.sampled_from(["a", "b", "price", "year"])
columns = st.builds(A.ColumnRef, st.sampled_from([None, "t", "u"]), names)
literals = st.one_of(
    st.integers(-1000, 1000),
    st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False),
    st.text(alphabet="abc' %_", max_size=5),
    st.booleans(),
    st.none(),
).map(A.Literal)
atoms = st.one_of(columns, literals)


def _extend(children):
    binop = st.builds(A.BinaryOp, st.sampled_from(["+", "-", "*", "/", "%", "=", "!=", "<", "<=", ">", ">=", "AND", "OR"]), children, children)
    return st.one_of(
        binop,
        st.builds(A.UnaryOp, st.just("NOT"), children),
        st.builds(A.UnaryOp, st.just("-"), columns),
        st.builds(A.IsNull, children, st.booleans()),
        st.builds(A.Between, children, children, children, st.booleans()),
        st.builds(A.InList, children, st.lists(children, min_size=1, max_size=3).map(tuple), st.booleans()),
        st.builds(A.Like, children, children, st.booleans()),
        st.builds(A.FuncCall, st.sampled_from(["LOWER", "ABS", "COALESCE"]), st.lists(children, min_size=1, max_size=2).map(tuple)),
        st.builds(A.FuncCall, st.sampled_from(["SUM", "MAX"]), st.tuples(children), st.booleans()),
    )


expressions = st.recursive(atoms, _extend, max_leaves=12)


@given(expressions)
def test_expression_round_trip(e):
    assert parse_expression(render_expr(e)) == e


@given(expressions, st.integers(1, 50), st.booleans())
def test_select_round_trip(e, k, distinct):
    q = A.Select(
        items=(A.SelectItem(A.ColumnRef("t", "a"), "x"), A.SelectItem(A.Star())),
        from_=A.FromClause(A.TableRef("tbl", "t")),
        where=e,
        vector=A.VectorClause(A.ColumnRef("t", "v"), A.EmbedText("q"), Metric.L2, k),
        distinct=distinct,
    )
    assert parse(render(q)) == q
