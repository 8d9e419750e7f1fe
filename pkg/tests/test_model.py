import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vectorsql.model import (
    BenchmarkSample,
    ColumnDef,
    ComplexityLabel,
    HybridSchema,
    Integration,
    Metric,
    ResultRow,
    ResultSet,
    ScalarType,
    Structural,
    TableDef,
    Vector,
    VectorColumnDef,
    as_vector,
)

from conftest import tiny_schema


def test_vector_dim_and_finiteness():
    v = Vector((1, 2.5, -3))
    assert v.dim == 3 and v.components == (1.0, 2.5, -3.0)
    with pytest.raises(ValueError):
        Vector(())
    with pytest.raises(ValueError):
        Vector((1.0, math.nan))
    with pytest.raises(ValueError):
        Vector((math.inf,))


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=20))
def test_vector_dim_equals_length(xs):
    v = Vector.of(xs)
    assert v.dim == len(xs)
    assert np.array_equal(v.as_array(), np.asarray(xs, dtype=float))


def test_as_vector_accepts_arrays_and_sequences():
    assert as_vector(np.array([1.0, 2.0])) == Vector((1.0, 2.0))
    assert as_vector([1, 2]) == Vector((1.0, 2.0))
    with pytest.raises(TypeError):
        as_vector(3)


def test_schema_rejects_bad_definitions():
    cols = (ColumnDef("id", ScalarType.INTEGER), ColumnDef("body", ScalarType.TEXT), ColumnDef("n", ScalarType.INTEGER))
    with pytest.raises(ValueError):
        TableDef("t", cols + (ColumnDef("id", ScalarType.TEXT),), "id")
    with pytest.raises(ValueError):
        TableDef("t", cols, "missing")
    with pytest.raises(ValueError):
        TableDef("t", cols, "body")
    with pytest.raises(ValueError):
        TableDef("t", cols, "id", (VectorColumnDef("v", 0, Metric.L2, "body"),))
    with pytest.raises(ValueError):
        TableDef("t", cols, "id", (VectorColumnDef("v", 4, Metric.L2, "nope"),))
    with pytest.raises(ValueError):
        TableDef("t", cols, "id", (VectorColumnDef("v", 4, Metric.L2, "n"),))
    t = TableDef("t", cols, "id")
    with pytest.raises(ValueError):
        HybridSchema((t, t))


def test_schema_lookup_and_strip_vectors():
    s = tiny_schema()
    assert s.table("items").vector_column("vec").dim == 2
    assert s.table("nope") is None
    assert all(not t.vector_columns for t in s.without_vectors().tables)


def test_result_set_invariants():
    rows = (ResultRow((1,), ("a",), 0.1), ResultRow((2,), ("b",), 0.3))
    rs = ResultSet(("x",), rows)
    assert rs.ids == [(1,), (2,)] and len(rs) == 2
    with pytest.raises(ValueError):
        ResultSet(("x",), rows + (ResultRow((1,), ("c",), 0.5),))
    with pytest.raises(ValueError):
        ResultSet(("x",), tuple(reversed(rows)))
    # order without distances is unconstrained
    ResultSet(("x",), (ResultRow((2,), ("b",)), ResultRow((1,), ("a",))))


def test_benchmark_sample_requires_nonempty_gold():
    label = ComplexityLabel(Structural.EASY, Integration.WHERE)
    with pytest.raises(ValueError):
        BenchmarkSample("s", "q", "SELECT 1", ResultSet(("a",), ()), label, ("kw",), 5)
    gold = ResultSet(("a",), (ResultRow((1,), (1,)),))
    with pytest.raises(ValueError):
        BenchmarkSample("s", "q", "SELECT 1", gold, label, ("kw",), 0)
    s = BenchmarkSample("s", "q", "SELECT name FROM items WHERE id = 1", gold, label, ("kw",), 5)
    assert s.check(tiny_schema()) == []
    assert label.cell == (Structural.EASY, Integration.WHERE)
