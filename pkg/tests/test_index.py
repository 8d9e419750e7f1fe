import io
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import ann_fixture
from vectorsql.errors import DimensionMismatchError, SnapshotFormatError
from vectorsql.index import kernels
from vectorsql.index.exact import ExactStore, knn_exact, metric_distances
from vectorsql.index.hnsw import AnnIndex, ann_search
from vectorsql.index.snapshot import load_index, read_index, save_index, write_index
from vectorsql.model import Metric


def recall(index, exact, queries, k, ef):
    hits = [len({i for i, _ in ann_search(index, q, k, ef)} & {i for i, _ in knn_exact(exact, q, k)})
            for q in queries]
    return sum(hits) / (k * len(queries))


@pytest.fixture(scope="module")
def fixture_1000():
    X, Q = ann_fixture()
    return AnnIndex.build(range(len(X)), X), ExactStore(range(len(X)), X), Q


# exact search

def test_exact_example():
    store = {1: (0, 0), 2: (3, 4), 3: (1, 0)}
    assert knn_exact(store, (0, 0), 2) == [(1, 0.0), (3, 1.0)]


def test_exact_all_and_subset():
    store = {1: (0, 0), 2: (3, 4), 3: (1, 0)}
    assert [i for i, _ in knn_exact(store, (0, 0), 10)] == [1, 3, 2]
    assert knn_exact(store, (0, 0), 5, subset={2}) == [(2, 5.0)]
    assert knn_exact(store, (0, 0), 5, subset={99}) == []


def test_exact_ties_by_id():
    store = {5: (1, 0), 2: (-1, 0), 9: (0, 1), 4: (0, -1)}
    assert [i for i, _ in knn_exact(store, (0, 0), 4)] == [2, 4, 5, 9]


def test_exact_errors():
    with pytest.raises(DimensionMismatchError):
        knn_exact({1: (0, 0)}, (0, 0, 0), 1)
    with pytest.raises(ValueError):
        knn_exact({1: (0, 0)}, (0, 0), 0)


def test_metric_conversions():
    m = np.array([[1.0, 0.0], [0.0, 2.0]])
    q = np.array([1.0, 1.0])
    assert metric_distances(m, q, Metric.DOT).tolist() == [-1.0, -2.0]
    cos = metric_distances(m, q, Metric.COSINE)
    assert cos == pytest.approx([1 - 2 ** -0.5] * 2)
    with pytest.raises(ValueError):
        metric_distances(m, np.zeros(2), Metric.COSINE)


@given(
    arrays(np.float64, st.tuples(st.integers(1, 30), st.just(3)), elements=st.floats(-10, 10)),
    st.lists(st.integers(0, 40), max_size=10),
    st.integers(1, 8),
)
def test_exact_subset_property(mat, subset, k):
    store = ExactStore(range(len(mat)), mat)
    out = knn_exact(store, np.zeros(3), k, subset=subset)
    valid = set(subset) & set(range(len(mat)))
    assert {i for i, _ in out} <= valid
    assert len(out) == min(k, len(valid))
    assert out == sorted(out, key=lambda t: (t[1], t[0]))


# graph index

def test_recall_floor(fixture_1000):
    index, exact, Q = fixture_1000
    assert recall(index, exact, Q, 10, 64) >= 0.9


def test_recall_monotone_in_ef(fixture_1000):
    index, exact, Q = fixture_1000
    values = [recall(index, exact, Q, 10, ef) for ef in (10, 16, 32, 64, 128, 1000)]
    assert values == sorted(values)
    assert values[-1] == 1.0


def test_full_beam_matches_oracle():
    X, Q = ann_fixture(n=200, n_queries=20, seed=3)
    index, exact = AnnIndex.build(range(200), X), ExactStore(range(200), X)
    for q in Q:
        got = ann_search(index, q, 10, 200)
        want = knn_exact(exact, q, 10)
        assert [i for i, _ in got] == [i for i, _ in want]
        assert np.allclose([d for _, d in got], [d for _, d in want], rtol=1e-12)


def test_graph_invariants(fixture_1000):
    index, _, _ = fixture_1000
    for deg in index.degrees:
        assert int(deg.max()) <= index.m
    stats = index.stats()
    assert stats.reachable == stats.size == 1000
    assert stats.layer_sizes[0] == 1000


def test_reported_distances_recompute(fixture_1000):
    index, exact, Q = fixture_1000
    for q in Q[:10]:
        for i, d in ann_search(index, q, 10, 64):
            true = float(np.linalg.norm(exact.vector(i) - q))
            assert d == pytest.approx(true, rel=1e-6)


def test_singleton_and_empty():
    one = AnnIndex.build([7], np.array([[1.0, 2.0]]))
    assert one.search([5.0, 5.0], 1) == [(7, pytest.approx(5.0))]
    empty = AnnIndex.build([], np.zeros((0, 2)))
    assert empty.search([0.0, 0.0], 3) == []


def test_search_errors():
    index = AnnIndex.build([1, 2], np.array([[0.0, 0.0], [1.0, 1.0]]))
    with pytest.raises(DimensionMismatchError):
        index.search([0.0], 1)
    with pytest.raises(ValueError):
        index.search([0.0, 0.0], 5, ef=2)


@pytest.mark.parametrize("metric", [Metric.COSINE, Metric.DOT])
def test_other_metrics_full_beam(metric):
    X, Q = ann_fixture(n=150, dim=8, n_queries=10, seed=5)
    index, exact = AnnIndex.build(range(150), X, metric), ExactStore(range(150), X, metric)
    for q in Q:
        assert [i for i, _ in index.search(q, 5, 150)] == [i for i, _ in knn_exact(exact, q, 5)]


def test_backends_agree():
    backends = kernels.available_backends()
    if "cython" not in backends:
        pytest.skip("compiled kernels not built")
    code = (
        "import numpy as np, sys; sys.path.insert(0, 'tests'); from conftest import ann_fixture;"
        "from vectorsql.index.hnsw import AnnIndex; from vectorsql.index import kernels;"
        "X, Q = ann_fixture(n=120, dim=8, n_queries=5);"
        "i = AnnIndex.build(range(120), X, m=8, ef_construction=32);"
        "print(kernels.BACKEND, [[a for a, _ in i.search(q, 5)] for q in Q], [n.tolist() for n in i.neighbors])"
    )
    outs = []
    for pure in ("0", "1"):
        env = dict(os.environ, VECTORSQL_PURE_PYTHON=pure)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        name, _, rest = res.stdout.partition(" ")
        outs.append((name, rest))
    assert [o[0] for o in outs] == ["cython", "python"]
    assert outs[0][1] == outs[1][1]


# snapshots

def test_snapshot_round_trip(tmp_path):
    X, Q = ann_fixture(n=100, dim=6, n_queries=5, seed=1)
    index = AnnIndex.build(range(100, 200), X, Metric.COSINE, m=6, ef_construction=20, ef_search=12, seed=4)
    save_index(index, tmp_path / "i.bin")
    back = load_index(tmp_path / "i.bin")
    assert back.stats() == index.stats()
    for q in Q:
        assert back.search(q, 5) == index.search(q, 5)


def test_snapshot_corruption():
    index = AnnIndex.build(range(10), np.eye(10))
    buf = io.BytesIO()
    write_index(index, buf)
    raw = buf.getvalue()
    cases = [raw[:10], raw[:-4], raw + b"\0", b"NOTANIDX" + raw[8:], raw[:8] + b"\x09\0\0\0" + raw[12:]]
    for bad in cases:
        with pytest.raises(SnapshotFormatError):
            read_index(io.BytesIO(bad))
