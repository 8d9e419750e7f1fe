import pytest

from vectorsql.sql.parser import parse
from vectorsql.validate import validate_query
from vectorsql.workload.scholar import SCHOLAR_SCHEMA, SCHOLAR_VECTORS, vectorize_schema


@pytest.fixture(scope="module")
def schema(scholar):
    return scholar.schema


def codes(sql, schema):
    return [d.code for d in validate_query(parse(sql), schema)]


def test_valid_query_has_no_diagnostics(schema):
    sql = ("SELECT p.title, v.name FROM papers AS p JOIN venues AS v ON v.id = p.venue_id "
           "WHERE p.year > 2020 ORDER BY DISTANCE(p.abstract_vec, EMBED('graphs')) LIMIT 5")
    assert codes(sql, schema) == []


def test_misspelled_column(schema):
    diags = validate_query(parse("SELECT title FROM papers WHERE papers.yeer > 2020"), schema)
    assert [d.code for d in diags] == ["unknown-column"]
    assert "yeer" in str(diags[0])
    assert diags[0].pos is not None


def test_zero_k(schema):
    assert codes("SELECT title FROM papers ORDER BY DISTANCE(abstract_vec, EMBED('x')) LIMIT 0", schema) == ["k-range"]


@pytest.mark.parametrize(
    "sql, code",
    [
        ("SELECT x FROM nope", "unknown-table"),
        ("SELECT id FROM papers AS p JOIN venues AS v ON v.id = p.venue_id", "ambiguous-column"),
        ("SELECT title FROM papers ORDER BY DISTANCE(abstract_vec, [1, 2]) LIMIT 3", "dim-mismatch"),
        ("SELECT title FROM papers ORDER BY DISTANCE(abstract_vec, EMBED('x'), COSINE) LIMIT 3", "metric-mismatch"),
        ("WITH a AS (SELECT id FROM papers), a AS (SELECT id FROM venues) SELECT id FROM a", "duplicate-cte"),
        ("SELECT p.id FROM papers AS p JOIN venues AS p ON p.id = p.id", "duplicate-binding"),
        ("SELECT venue_id, title, COUNT(*) FROM papers GROUP BY venue_id", "ungrouped-column"),
        ("SELECT title FROM papers WHERE COUNT(*) > 1", "aggregate-misuse"),
        ("SELECT MAX(COUNT(*)) FROM papers", "nested-aggregate"),
        ("SELECT LOWER(title, abstract) FROM papers", "function-arity"),
        ("SELECT title FROM papers WHERE id IN (SELECT id, title FROM papers)", "subquery-columns"),
        ("SELECT title FROM papers WHERE year = 'x'", "type-mismatch"),
        ("SELECT title FROM papers WHERE year = $1", "unbound-parameter"),
        ("SELECT title FROM papers ORDER BY DISTANCE(title, EMBED('x')) LIMIT 3", "not-vector-column"),
        ("SELECT abstract_vec FROM papers", "vector-as-scalar"),
    ],
)
def test_diagnostic_codes(schema, sql, code):
    assert code in codes(sql, schema)


def test_vectorize_schema_errors():
    from vectorsql.embedding import HashEmbedder
    from vectorsql.errors import ResolutionError
    from vectorsql.workload.scholar import VectorSpec, scholar_rows

    rows = scholar_rows(0)
    with pytest.raises(ResolutionError) as exc:
        vectorize_schema(SCHOLAR_SCHEMA, HashEmbedder(8), rows, [VectorSpec("papers", "nope")])
    assert exc.value.code == "unknown-column"
    with pytest.raises(ResolutionError) as exc:
        vectorize_schema(SCHOLAR_SCHEMA, HashEmbedder(8), rows, [VectorSpec("papers", "year")])
    assert exc.value.code == "type-mismatch"
    assert len(SCHOLAR_VECTORS) == 4
