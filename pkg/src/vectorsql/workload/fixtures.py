"""Seeded recall-degradation fixture.

Three query families over 1000-row base tables, one per integration depth:

* Non: unfiltered nearest neighbours in a CTE, consumed by ``WHERE id IN``.
* Where: a same-table filter keeping roughly a fifth to two fifths of rows.
* Join: a filter on a joined table keeping a few percent of rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..embedding import Embedder
from ..engine.store import HybridStore, IndexParams
from ..model import BenchmarkSample
from ..sql.parser import parse
from ..sql.render import quote_string, render
from .complexity import classify
from .scholar import ScholarSizes, scholar_store
from .select import build_golden
from .vocab import TOPICS

FIXTURE_SIZES = ScholarSizes(venues=40, papers=1000, authors=1000, max_authors_per_paper=3, top_tier_fraction=0.05)
FIXTURE_K = 10

# (family, integration, template); {kw} is a quoted keyword and {k} the LIMIT
FAMILIES: tuple[tuple[str, str], ...] = (
    ("non-papers", "WITH knn AS (SELECT id FROM papers ORDER BY DISTANCE(abstract_vec, EMBED({kw})) LIMIT {k}) "
                   "SELECT p.id, p.title FROM papers AS p WHERE p.id IN (SELECT id FROM knn)"),
    ("non-authors", "WITH knn AS (SELECT id FROM authors ORDER BY DISTANCE(bio_vec, EMBED({kw})) LIMIT {k}) "
                    "SELECT a.id, a.name FROM authors AS a WHERE a.id IN (SELECT id FROM knn)"),
    ("where-papers", "SELECT p.id, p.title FROM papers AS p WHERE p.year >= 2016 "
                     "ORDER BY DISTANCE(p.abstract_vec, EMBED({kw})) LIMIT {k}"),
    ("where-authors", "SELECT a.id, a.name FROM authors AS a WHERE a.h_index >= 50 "
                      "ORDER BY DISTANCE(a.bio_vec, EMBED({kw})) LIMIT {k}"),
    ("join-papers", "SELECT p.id, p.title, v.name AS venue FROM papers AS p JOIN venues AS v ON v.id = p.venue_id "
                    "WHERE v.tier = 'A*' ORDER BY DISTANCE(p.abstract_vec, EMBED({kw})) LIMIT {k}"),
    ("join-authors", "SELECT a.id, a.name, p.title FROM authors AS a JOIN writes AS w ON w.author_id = a.id "
                     "JOIN papers AS p ON p.id = w.paper_id WHERE p.year = 2021 AND p.is_open = TRUE "
                     "ORDER BY DISTANCE(a.bio_vec, EMBED({kw})) LIMIT {k}"),
)


@dataclass(frozen=True)
class Fixture:
    store: HybridStore
    samples: tuple[BenchmarkSample, ...]


def fixture_keywords(per_family: int) -> list[str]:
    kws = [e for t in TOPICS for e in t.entities]
    return [kws[(i * 7) % len(kws)] for i in range(per_family)]


def degradation_fixture(
    seed: int = 0,
    per_family: int = 8,
    k: int = FIXTURE_K,
    embedder: Optional[Embedder] = None,
    params: Optional[IndexParams] = None,
) -> Fixture:
    store = scholar_store(seed, FIXTURE_SIZES, embedder, params)
    samples = []
    for family, template in FAMILIES:
        for kw in fixture_keywords(per_family):
            query = parse(template.format(kw=quote_string(kw), k=k))
            samples.append(
                BenchmarkSample(
                    id=f"{family}-{len(samples):04d}",
                    question=f"{family} neighbours of {kw}",
                    sql=render(query),
                    golden=build_golden(store, [query], embedder=embedder),
                    label=classify(query),
                    keywords=(kw,),
                    top_k=k,
                )
            )
    return Fixture(store, tuple(samples))
