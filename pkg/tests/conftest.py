from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from vectorsql.engine.store import HybridStore
from vectorsql.model import ColumnDef, HybridSchema, Metric, ScalarType, TableDef, VectorColumnDef
from vectorsql.workload.scholar import ScholarSizes, scholar_store

settings.register_profile("repo", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

I, R, T, B = ScalarType.INTEGER, ScalarType.REAL, ScalarType.TEXT, ScalarType.BOOLEAN


def tiny_schema(dim: int = 2, metric: Metric = Metric.L2) -> HybridSchema:
    items = TableDef(
        "items",
        (ColumnDef("id", I), ColumnDef("name", T), ColumnDef("grp", I), ColumnDef("price", R), ColumnDef("ok", B)),
        "id",
        (VectorColumnDef("vec", dim, metric, "name"),),
    )
    tags = TableDef("tags", (ColumnDef("id", I), ColumnDef("item_id", I), ColumnDef("label", T)), "id")
    return HybridSchema((items, tags))


def tiny_store() -> HybridStore:
    """Three items on a line plus tags; the global nearest to the origin is 'C'."""
    rows = {
        "items": [
            {"id": 1, "name": "A", "grp": 1, "price": 10.0, "ok": True},
            {"id": 2, "name": "B", "grp": 1, "price": None, "ok": False},
            {"id": 3, "name": "C", "grp": 2, "price": 5.5, "ok": True},
        ],
        "tags": [
            {"id": 10, "item_id": 1, "label": "red"},
            {"id": 11, "item_id": 1, "label": "blue"},
            {"id": 12, "item_id": 3, "label": "red"},
        ],
    }
    vectors = {("items", "vec"): {1: [2.0, 0.0], 2: [3.0, 0.0], 3: [1.0, 0.0]}}
    return HybridStore.from_rows(tiny_schema(), rows, vectors)


@pytest.fixture
def store() -> HybridStore:
    return tiny_store()


@pytest.fixture(scope="session")
def scholar() -> HybridStore:
    return scholar_store(0, ScholarSizes(venues=30, papers=300, authors=150))


def ann_fixture(n: int = 1000, dim: int = 32, n_queries: int = 50, seed: int = 0):
    """Fixed-seed Gaussian points and queries for graph-recall checks."""
    import numpy as np

    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, dim)), rng.standard_normal((n_queries, dim))


# one summary line per acceptance criterion; tests attach details with record_property
_ACCEPTANCE: dict[str, tuple[str, str, str]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        props = dict(report.user_properties)
        verdict = "PASS" if report.outcome == "passed" else "FAIL"
        _ACCEPTANCE[report.nodeid] = (props.get("criterion", report.nodeid), verdict, props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, verdict, detail in sorted(_ACCEPTANCE.values()):
        terminalreporter.write_line(f"{verdict}  {name}" + (f"  [{detail}]" if detail else ""))
