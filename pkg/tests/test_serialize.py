from hypothesis import given
from hypothesis import strategies as st

from vectorsql.model import ComplexityLabel, Integration, Intent, ResultRow, ResultSet, Structural
from vectorsql.serialize import dumps, from_json, loads, to_json
from vectorsql.sql.parser import parse

from conftest import tiny_schema


def test_schema_round_trip():
    s = tiny_schema()
    assert loads(dumps(s)) == s
    doc = to_json(s)
    assert doc["_type"] == "HybridSchema"
    assert doc["tables"][0]["vector_columns"][0]["metric"] == {"_enum": "Metric", "value": "l2"}


def test_query_round_trip_preserves_structure():
    q = parse(
        "WITH k AS (SELECT id FROM items ORDER BY DISTANCE(vec, EMBED('x')) LIMIT 3) "
        "SELECT i.name, COUNT(*) AS n FROM items AS i LEFT JOIN tags AS t ON t.item_id = i.id "
        "WHERE i.id IN (SELECT id FROM k) AND i.price IS NOT NULL GROUP BY i.name HAVING COUNT(*) > 0"
    )
    back = loads(dumps(q))
    assert back == q
    assert dumps(back) == dumps(q)


scalars = st.one_of(st.none(), st.booleans(), st.integers(-10**6, 10**6), st.text(max_size=8),
                    st.floats(allow_nan=False, allow_infinity=False))


@given(st.lists(st.tuples(st.integers(0, 50), scalars), max_size=8, unique_by=lambda t: t[0]))
def test_result_set_round_trip(items):
    rs = ResultSet(("id", "v"), tuple(ResultRow((i,), (i, v)) for i, v in items), truncated=bool(items))
    assert from_json(to_json(rs)) == rs


def test_label_round_trip():
    lab = ComplexityLabel(Structural.HARD, Integration.JOIN, Intent.REASONING, False)
    assert loads(dumps(lab)) == lab
