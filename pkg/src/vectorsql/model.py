"""Shared domain types: vectors, hybrid schemas, result sets and labels.

Everything here is immutable after construction. Validation happens in
``__post_init__`` so an instance that exists is an instance that holds its
invariants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Optional, Sequence

import numpy as np


class Metric(str, Enum):
    L2 = "l2"
    COSINE = "cosine"
    DOT = "dot"


class ScalarType(str, Enum):
    INTEGER = "integer"
    REAL = "real"
    TEXT = "text"
    BOOLEAN = "boolean"


class Structural(str, Enum):
    EASY = "Easy"
    MEDIUM = "Medium"
    HARD = "Hard"
    EXTRA_HARD = "ExtraHard"


class Integration(str, Enum):
    NON = "Non"
    WHERE = "Where"
    JOIN = "Join"


class Intent(str, Enum):
    ENTITY = "Entity"
    CONCEPT = "Concept"
    REASONING = "Reasoning"


INTEGRATION_RANK = {Integration.NON: 0, Integration.WHERE: 1, Integration.JOIN: 2}


@dataclass(frozen=True)
class Vector:
    components: tuple[float, ...]

    def __post_init__(self) -> None:
        comps = tuple(float(c) for c in self.components)
        if not comps:
            raise ValueError("vector must have at least one component")
        if not all(math.isfinite(c) for c in comps):
            raise ValueError("vector components must be finite")
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return len(self.components)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.components, dtype=np.float64)

    @classmethod
    def of(cls, values: Iterable[float]) -> "Vector":
        return cls(tuple(float(v) for v in values))


@dataclass(frozen=True)
class ColumnDef:
    name: str
    type: ScalarType


@dataclass(frozen=True)
class VectorColumnDef:
    name: str
    dim: int
    metric: Metric
    source: str
    embedder: str = "hash64"


@dataclass(frozen=True)
class TableDef:
    name: str
    columns: tuple[ColumnDef, ...]
    primary_key: str
    vector_columns: tuple[VectorColumnDef, ...] = ()

    def __post_init__(self) -> None:
        names = [c.name for c in self.columns] + [v.name for v in self.vector_columns]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate column name in table {self.name!r}")
        by_name = {c.name: c for c in self.columns}
        if self.primary_key not in by_name:
            raise ValueError(f"primary key {self.primary_key!r} is not a column of {self.name!r}")
        if by_name[self.primary_key].type is not ScalarType.INTEGER:
            raise ValueError("primary key must be an integer column")
        for vc in self.vector_columns:
            if vc.dim <= 0:
                raise ValueError(f"vector column {vc.name!r} must have positive dim")
            src = by_name.get(vc.source)
            if src is None:
                raise ValueError(f"vector column {vc.name!r}: unknown source column {vc.source!r}")
            if src.type is not ScalarType.TEXT:
                raise ValueError(f"vector column {vc.name!r}: source column must be text")

    def column(self, name: str) -> Optional[ColumnDef]:
        for c in self.columns:
            if c.name == name:
                return c
        return None

    def vector_column(self, name: str) -> Optional[VectorColumnDef]:
        for v in self.vector_columns:
            if v.name == name:
                return v
        return None

    def column_index(self, name: str) -> int:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return i
        raise KeyError(name)


@dataclass(frozen=True)
class HybridSchema:
    tables: tuple[TableDef, ...]

    def __post_init__(self) -> None:
        names = [t.name for t in self.tables]
        if len(set(names)) != len(names):
            raise ValueError("table names must be unique")

    def table(self, name: str) -> Optional[TableDef]:
        for t in self.tables:
            if t.name == name:
                return t
        return None

    def without_vectors(self) -> "HybridSchema":
        return HybridSchema(tuple(TableDef(t.name, t.columns, t.primary_key) for t in self.tables))


RowId = tuple[int, ...]


@dataclass(frozen=True)
class ResultRow:
    row_id: RowId
    values: tuple[Any, ...]
    distance: Optional[float] = None


@dataclass(frozen=True)
class ResultSet:
    columns: tuple[str, ...]
    rows: tuple[ResultRow, ...]
    truncated: bool = False

    def __post_init__(self) -> None:
        ids = [r.row_id for r in self.rows]
        if len(set(ids)) != len(ids):
            raise ValueError("row ids must be unique within a result set")
        dists = [r.distance for r in self.rows]
        if dists and all(d is not None for d in dists):
            if any(b < a for a, b in zip(dists, dists[1:])):
                raise ValueError("distances of a vector-ordered result must be non-decreasing")

    @property
    def ids(self) -> list[RowId]:
        return [r.row_id for r in self.rows]

    def id_set(self) -> set[RowId]:
        return {r.row_id for r in self.rows}

    def __len__(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class ComplexityLabel:
    structural: Structural
    integration: Integration
    intent: Intent = Intent.ENTITY
    plain_sql: bool = False

    @property
    def cell(self) -> tuple[Structural, Integration]:
        return (self.structural, self.integration)


@dataclass(frozen=True)
class BenchmarkSample:
    id: str
    question: str
    sql: str
    golden: ResultSet
    label: ComplexityLabel
    keywords: tuple[str, ...]
    top_k: int
    variants: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.golden.rows:
            raise ValueError(f"sample {self.id}: golden result set must be non-empty")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")

    def check(self, schema: HybridSchema) -> list:
        """Parse and validate the canonical SQL; returns the diagnostics."""
        from .sql.parser import parse
        from .validate import validate_query

        return validate_query(parse(self.sql), schema)


def as_vector(value: Any) -> Vector:
    if isinstance(value, Vector):
        return value
    if isinstance(value, np.ndarray):
        return Vector(tuple(float(x) for x in value.ravel()))
    if isinstance(value, Sequence):
        return Vector(tuple(float(x) for x in value))
    raise TypeError(f"cannot interpret {type(value).__name__} as a vector")
