"""Complexity labels: structural tier by a point rubric, integration by AST position.

Rubric points
    joins           max(0, total JOIN count - 1)
    nested query    +1 per CTE, FROM subquery or IN subquery, except vector plumbing
    GROUP BY        +2 per level
    aggregate       +1 per level that aggregates without GROUP BY
    HAVING          +1 per level

Vector plumbing is a CTE or subquery whose own level holds a vector clause,
or a subquery that just reads such a CTE (single source, no WHERE, JOIN or
grouping). Points map to tiers through ``TIER_THRESHOLDS``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .. import ast as A
from ..model import INTEGRATION_RANK, ComplexityLabel, Integration, Intent, Structural


@dataclass(frozen=True)
class Rubric:
    join: int = 1
    nested: int = 1
    group_by: int = 2
    aggregate: int = 1
    having: int = 1
    # minimum points for Medium, Hard and ExtraHard
    thresholds: tuple[int, int, int] = (1, 2, 3)

    def __post_init__(self) -> None:
        t = tuple(self.thresholds)
        if len(t) != 3 or not 0 < t[0] < t[1] < t[2]:
            raise ValueError(f"thresholds must be three increasing positive ints, got {t}")
        if min(self.join, self.nested, self.group_by, self.aggregate, self.having) < 0:
            raise ValueError("rubric weights must be non-negative")

    def tier(self, points: int) -> Structural:
        medium, hard, extra = self.thresholds
        if points >= extra:
            return Structural.EXTRA_HARD
        if points >= hard:
            return Structural.HARD
        if points >= medium:
            return Structural.MEDIUM
        return Structural.EASY


DEFAULT_RUBRIC = Rubric()

TIER_POINTS = {Structural.EASY: 0, Structural.MEDIUM: 1, Structural.HARD: 2, Structural.EXTRA_HARD: 3}


def _vector_ctes(query: A.Select) -> set[str]:
    names = set()
    for ctx in A.iter_selects(query):
        for cte in ctx.select.ctes:
            if cte.query.vector is not None:
                names.add(cte.name)
    return names


def _is_plumbing(ctx: A.SelectContext, vector_ctes: set[str]) -> bool:
    sel = ctx.select
    if sel.vector is not None:
        return True
    if ctx.kind not in ("from", "in") or sel.from_ is None:
        return False
    src = sel.from_.source
    return (
        isinstance(src, A.TableRef)
        and src.name in vector_ctes
        and not sel.from_.joins
        and sel.where is None
        and not sel.is_grouped
        and not sel.ctes
    )


def structural_points(query: A.Select, rubric: Rubric = DEFAULT_RUBRIC) -> int:
    vctes = _vector_ctes(query)
    joins = 0
    points = 0
    for ctx in A.iter_selects(query):
        sel = ctx.select
        if sel.from_ is not None:
            joins += len(sel.from_.joins)
        if ctx.kind != "top" and not _is_plumbing(ctx, vctes):
            points += rubric.nested
        if sel.group_by:
            points += rubric.group_by
        elif any(A.contains_aggregate(item.expr) for item in sel.items) or sel.having is not None:
            points += rubric.aggregate
        if sel.having is not None:
            points += rubric.having
    return points + rubric.join * max(0, joins - 1)


def clause_integration(ctx: A.SelectContext) -> Integration:
    sel = ctx.select
    if ctx.kind != "top":
        return Integration.NON
    if sel.from_ is not None and sel.from_.joins:
        return Integration.JOIN
    if sel.where is not None:
        return Integration.WHERE
    return Integration.NON


def classify(query: A.Select, intent: Intent = Intent.ENTITY, rubric: Optional[Rubric] = None) -> ComplexityLabel:
    """Label ``query``; integration is the deepest coupling over its vector clauses."""
    rubric = rubric or DEFAULT_RUBRIC
    structural = rubric.tier(structural_points(query, rubric))
    levels = [clause_integration(ctx) for ctx in A.iter_selects(query) if ctx.select.vector is not None]
    if not levels:
        return ComplexityLabel(structural, Integration.NON, intent, plain_sql=True)
    integration = max(levels, key=INTEGRATION_RANK.__getitem__)
    return ComplexityLabel(structural, integration, intent)
