"""Emit backend SQL (sqlite-vec, pgvector, ClickHouse) from canonical ASTs.

EMBED(...) payloads are resolved before rendering: the caller passes a mapping
from query text to vector and the literal vector is inlined.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping

import numpy as np

from .. import ast as A
from ..errors import UnsupportedInDialectError
from ..model import Metric, Vector, as_vector
from .render import Renderer, quote_ident


class Dialect(str, Enum):
    CANONICAL = "canonical"
    SQLITE_VEC = "sqlite-vec"
    PGVECTOR = "pgvector"
    CLICKHOUSE = "clickhouse"


@dataclass(frozen=True)
class Placeholder:
    text: str
    column: str


@dataclass(frozen=True)
class TranspileOutput:
    sql: str
    placeholders: tuple[Placeholder, ...]


def _fmt(value: float) -> str:
    return repr(float(value))


class _BackendRenderer(Renderer):
    def __init__(self, embedded: Mapping[str, Vector]) -> None:
        self.embedded = embedded
        self.placeholders: list[Placeholder] = []

    def resolve(self, clause: A.VectorClause) -> tuple[float, ...]:
        target = clause.target
        if isinstance(target, A.VectorLiteral):
            return target.values
        if isinstance(target, A.EmbedText) and isinstance(target.text, str):
            text = target.text
            if text not in self.embedded:
                raise KeyError(f"no vector supplied for EMBED text {text!r}")
            self.placeholders.append(Placeholder(text, self.column(clause.column)))
            return as_vector(self.embedded[text]).components
        raise UnsupportedInDialectError("template parameters cannot be transpiled")

    def param(self, param: A.Param) -> str:
        raise UnsupportedInDialectError("template parameters cannot be transpiled")


class PgvectorRenderer(_BackendRenderer):
    OPERATORS = {Metric.L2: "<->", Metric.COSINE: "<=>", Metric.DOT: "<#>"}

    def vector_order(self, select: A.Select) -> str:
        clause = select.vector
        assert clause is not None
        vec = "'[" + ",".join(_fmt(v) for v in self.resolve(clause)) + "]'"
        text = f"{self.column(clause.column)} {self.OPERATORS[clause.metric]} {vec}"
        # grouped levels rank groups by their nearest member
        return f"MIN({text})" if select.is_grouped else text


class ClickHouseRenderer(_BackendRenderer):
    FUNCTIONS = {Metric.L2: "L2Distance", Metric.COSINE: "cosineDistance"}

    def vector_order(self, select: A.Select) -> str:
        clause = select.vector
        assert clause is not None
        vec = "[" + ", ".join(_fmt(v) for v in self.resolve(clause)) + "]"
        col = self.column(clause.column)
        if clause.metric is Metric.DOT:
            text = f"-dotProduct({col}, {vec})"
        else:
            text = f"{self.FUNCTIONS[clause.metric]}({col}, {vec})"
        return f"min({text})" if select.is_grouped else text


class SqliteVecRenderer(_BackendRenderer):
    """vec0 virtual-table form: ``col MATCH '[..]' AND k = n ORDER BY distance``."""

    def _check(self, select: A.Select) -> None:
        if select.from_ is not None and any(j.kind == "LEFT" for j in select.from_.joins):
            raise UnsupportedInDialectError("LEFT JOIN has no rendering in the sqlite-vec vec0 MATCH form")
        if select.is_grouped:
            raise UnsupportedInDialectError("grouped vector ranking has no rendering in the sqlite-vec vec0 MATCH form")

    def _qualifier(self, select: A.Select) -> str:
        clause = select.vector
        assert clause is not None
        return "" if clause.column.table is None else quote_ident(clause.column.table) + "."

    def where_clause(self, select: A.Select) -> str | None:
        if select.vector is None:
            return super().where_clause(select)
        self._check(select)
        clause = select.vector
        vec = "'[" + ",".join(_fmt(v) for v in self.resolve(clause)) + "]'"
        k = self.limit_value(clause.k)
        match = f"{self.column(clause.column)} MATCH {vec} AND {self._qualifier(select)}k = {k}"
        if select.where is None:
            return match
        return f"{match} AND {self.wrap(select.where, 3)}"

    def vector_tail(self, select: A.Select) -> list[str]:
        return [f"ORDER BY {self._qualifier(select)}distance"]


class _CanonicalRecorder(Renderer):
    def __init__(self) -> None:
        self.placeholders: list[Placeholder] = []

    def vector_order(self, select: A.Select) -> str:
        clause = select.vector
        assert clause is not None
        if isinstance(clause.target, A.EmbedText) and isinstance(clause.target.text, str):
            self.placeholders.append(Placeholder(clause.target.text, self.column(clause.column)))
        return super().vector_order(select)


_RENDERERS = {
    Dialect.SQLITE_VEC: SqliteVecRenderer,
    Dialect.PGVECTOR: PgvectorRenderer,
    Dialect.CLICKHOUSE: ClickHouseRenderer,
}


def transpile(
    query: A.Select,
    dialect: Dialect | str,
    embedded: Mapping[str, Vector | np.ndarray | list] | None = None,
) -> TranspileOutput:
    """Render ``query`` for ``dialect`` with EMBED payloads inlined from ``embedded``."""
    dialect = Dialect(dialect)
    if dialect is Dialect.CANONICAL:
        canon = _CanonicalRecorder()
        return TranspileOutput(canon.render(query), tuple(canon.placeholders))
    renderer = _RENDERERS[dialect](embedded or {})
    sql = renderer.render(query)
    return TranspileOutput(sql, tuple(renderer.placeholders))
