"""Seeded scholarly database: schema, synthetic rows and vectorization."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from ..embedding import Embedder, default_embedder
from ..engine.store import HybridStore, IndexParams
from ..errors import DimensionMismatchError, ResolutionError
from ..model import ColumnDef, HybridSchema, Metric, ScalarType, TableDef, VectorColumnDef
from .vocab import AFFILIATIONS, COUNTRIES, FILLER, FIRST_NAMES, LAST_NAMES, TIERS, TOPICS, VENUE_WORDS

I, R, T, B = ScalarType.INTEGER, ScalarType.REAL, ScalarType.TEXT, ScalarType.BOOLEAN

SCHOLAR_SCHEMA = HybridSchema(
    (
        TableDef(
            "venues",
            (ColumnDef("id", I), ColumnDef("name", T), ColumnDef("tier", T), ColumnDef("country", T), ColumnDef("description", T)),
            "id",
        ),
        TableDef(
            "papers",
            (
                ColumnDef("id", I),
                ColumnDef("title", T),
                ColumnDef("abstract", T),
                ColumnDef("year", I),
                ColumnDef("citations", I),
                ColumnDef("venue_id", I),
                ColumnDef("is_open", B),
                ColumnDef("score", R),
            ),
            "id",
        ),
        TableDef(
            "authors",
            (ColumnDef("id", I), ColumnDef("name", T), ColumnDef("affiliation", T), ColumnDef("h_index", I), ColumnDef("bio", T)),
            "id",
        ),
        TableDef(
            "writes",
            (ColumnDef("id", I), ColumnDef("paper_id", I), ColumnDef("author_id", I), ColumnDef("position", I)),
            "id",
        ),
    )
)


@dataclass(frozen=True)
class VectorSpec:
    """Embed ``table.source`` into a vector column (default name ``<source>_vec``)."""

    table: str
    source: str
    name: Optional[str] = None
    metric: Metric = Metric.L2

    @property
    def column(self) -> str:
        return self.name or f"{self.source}_vec"


SCHOLAR_VECTORS: tuple[VectorSpec, ...] = (
    VectorSpec("papers", "abstract"),
    VectorSpec("papers", "title", metric=Metric.COSINE),
    VectorSpec("authors", "bio"),
    VectorSpec("venues", "description", metric=Metric.COSINE),
)


@dataclass(frozen=True)
class ScholarSizes:
    venues: int = 40
    papers: int = 400
    authors: int = 200
    max_authors_per_paper: int = 3
    # fraction of venues in the top tier; keeps tier filters selective
    top_tier_fraction: float = 0.05


def _sentence(rng: np.random.Generator, topic_idx: int, n_words: int) -> str:
    topic = TOPICS[topic_idx]
    words = list(rng.choice(topic.words, size=n_words))
    words.append(str(rng.choice(topic.entities)))
    other = TOPICS[int(rng.integers(len(TOPICS)))]
    words.append(str(rng.choice(other.words)))
    words += list(rng.choice(FILLER, size=2))
    rng.shuffle(words)
    return " ".join(str(w) for w in words)


def scholar_rows(seed: int = 0, sizes: ScholarSizes = ScholarSizes()) -> dict[str, list[dict[str, Any]]]:
    """Deterministic rows for the scholar schema."""
    rng = np.random.default_rng(seed)
    n_top = max(1, round(sizes.venues * sizes.top_tier_fraction))
    venues = []
    for vid in range(1, sizes.venues + 1):
        t = int(rng.integers(len(TOPICS)))
        tier = TIERS[0] if vid <= n_top else str(rng.choice(TIERS[1:]))
        venues.append(
            {
                "id": vid,
                "name": f"{TOPICS[t].name} {rng.choice(VENUE_WORDS)} {vid}",
                "tier": tier,
                "country": str(rng.choice(COUNTRIES)),
                "description": f"{TOPICS[t].concept} {_sentence(rng, t, 4)}",
            }
        )
    papers = []
    for pid in range(1, sizes.papers + 1):
        t = int(rng.integers(len(TOPICS)))
        title_words = rng.choice(TOPICS[t].words, size=3, replace=False)
        papers.append(
            {
                "id": pid,
                "title": " ".join(str(w) for w in title_words) + f" {rng.choice(TOPICS[t].entities)}",
                "abstract": ". ".join(_sentence(rng, t, 6) for _ in range(2)),
                "year": int(rng.integers(2000, 2024)),
                "citations": int(rng.geometric(0.02)) - 1,
                "venue_id": int(rng.integers(1, sizes.venues + 1)),
                "is_open": bool(rng.random() < 0.5),
                "score": None if rng.random() < 0.05 else round(float(rng.uniform(0, 10)), 2),
            }
        )
    authors = []
    for aid in range(1, sizes.authors + 1):
        t = int(rng.integers(len(TOPICS)))
        authors.append(
            {
                "id": aid,
                "name": f"{rng.choice(FIRST_NAMES)} {rng.choice(LAST_NAMES)}",
                "affiliation": str(rng.choice(AFFILIATIONS)),
                "h_index": int(rng.integers(0, 80)),
                "bio": f"researcher working on {TOPICS[t].name} {_sentence(rng, t, 5)}",
            }
        )
    writes = []
    wid = 1
    for pid in range(1, sizes.papers + 1):
        n = int(rng.integers(1, sizes.max_authors_per_paper + 1))
        for pos, aid in enumerate(rng.choice(sizes.authors, size=min(n, sizes.authors), replace=False), start=1):
            writes.append({"id": wid, "paper_id": pid, "author_id": int(aid) + 1, "position": pos})
            wid += 1
    return {"venues": venues, "papers": papers, "authors": authors, "writes": writes}


def vectorize_schema(
    schema: HybridSchema,
    embedder: Embedder,
    rows: Mapping[str, Iterable[Union[Mapping[str, Any], Sequence[Any]]]],
    specs: Sequence[VectorSpec],
    params: IndexParams = IndexParams(),
) -> HybridStore:
    """Add one vector column per spec and embed every row's source text.

    NULL or empty text embeds as the empty string, whose vector the embedder
    defines; such rows are kept.
    """
    materialised = {name: list(rs) for name, rs in rows.items()}
    by_table: dict[str, list[VectorSpec]] = {}
    for spec in specs:
        t = schema.table(spec.table)
        if t is None:
            raise ResolutionError(f"unknown table {spec.table!r}", "unknown-table")
        col = t.column(spec.source)
        if col is None:
            raise ResolutionError(f"{spec.table} has no column {spec.source!r}", "unknown-column")
        if col.type is not ScalarType.TEXT:
            raise ResolutionError(f"{spec.table}.{spec.source} is not a text column", "type-mismatch")
        by_table.setdefault(spec.table, []).append(spec)

    tables = []
    vectors: dict[tuple[str, str], dict[int, np.ndarray]] = {}
    for t in schema.tables:
        extra = tuple(
            VectorColumnDef(s.column, embedder.dim, s.metric, s.source, embedder.id) for s in by_table.get(t.name, ())
        )
        tables.append(TableDef(t.name, t.columns, t.primary_key, t.vector_columns + extra))
        if not extra:
            continue
        names = [c.name for c in t.columns]
        for spec in by_table[t.name]:
            out: dict[int, np.ndarray] = {}
            for raw in materialised.get(t.name, ()):
                rec = raw if isinstance(raw, Mapping) else dict(zip(names, raw))
                text = rec.get(spec.source) or ""
                vec = np.asarray(embedder.embed_array(text), dtype=np.float64)
                if vec.shape != (embedder.dim,):
                    raise DimensionMismatchError(
                        f"embedder {embedder.id!r} returned shape {vec.shape}, expected ({embedder.dim},)"
                    )
                out[rec[t.primary_key]] = vec
            vectors[(t.name, spec.column)] = out
    return HybridStore.from_rows(HybridSchema(tuple(tables)), materialised, vectors, params)


def scholar_store(
    seed: int = 0,
    sizes: ScholarSizes = ScholarSizes(),
    embedder: Optional[Embedder] = None,
    params: Optional[IndexParams] = None,
    specs: Sequence[VectorSpec] = SCHOLAR_VECTORS,
) -> HybridStore:
    emb = embedder or default_embedder()
    return vectorize_schema(SCHOLAR_SCHEMA, emb, scholar_rows(seed, sizes), specs, params or IndexParams(seed=seed))


@dataclass(frozen=True)
class Filter:
    """A scalar predicate template: ``<alias>.<column> <op> <value>``."""

    column: str
    op: str
    values: tuple[Any, ...]
    phrase: str = ""


@dataclass(frozen=True)
class JoinEdge:
    """``child.fk = parent.pk``."""

    child: str
    fk: str
    parent: str
    pk: str = "id"


@dataclass(frozen=True)
class TableProfile:
    name: str
    alias: str
    noun: str
    display: tuple[str, ...]
    filters: tuple[Filter, ...]
    group_keys: tuple[str, ...] = ()
    measure: Optional[str] = None


@dataclass(frozen=True)
class SchemaProfile:
    """What the generator may do with each table."""

    tables: tuple[TableProfile, ...]
    edges: tuple[JoinEdge, ...]
    keyword_topics: tuple = field(default=TOPICS)

    def table(self, name: str) -> Optional[TableProfile]:
        for t in self.tables:
            if t.name == name:
                return t
        return None


SCHOLAR_PROFILE = SchemaProfile(
    tables=(
        TableProfile(
            "papers",
            "p",
            "papers",
            ("title", "year"),
            (
                Filter("year", ">=", (2008, 2012, 2015, 2018), "published in or after"),
                Filter("citations", ">", (10, 25, 50, 100), "with more citations than"),
                Filter("is_open", "=", (True,), "that are open access"),
                Filter("score", ">=", (3.0, 5.0, 7.0), "with review score at least"),
                Filter("year", "BETWEEN", ((2005, 2012), (2010, 2018), (2015, 2023)), "published between"),
            ),
            ("year", "is_open"),
            "citations",
        ),
        TableProfile(
            "venues",
            "v",
            "venues",
            ("name", "tier"),
            (
                Filter("tier", "=", ("A*", "A", "B"), "at venues of tier"),
                Filter("country", "=", COUNTRIES[:4], "at venues located in"),
                Filter("tier", "IN", (("A*", "A"), ("B", "C")), "at venues with tier among"),
            ),
            ("tier", "country"),
        ),
        TableProfile(
            "authors",
            "a",
            "authors",
            ("name", "h_index"),
            (
                Filter("h_index", ">", (20, 40, 60), "by authors with h-index above"),
                Filter("affiliation", "=", AFFILIATIONS[:4], "by authors affiliated with"),
                Filter("name", "LIKE", ("a%", "k%", "%li"), "by authors whose name matches"),
            ),
            ("affiliation",),
            "h_index",
        ),
        TableProfile(
            "writes",
            "w",
            "authorships",
            ("position",),
            (
                Filter("position", "=", (1, 2), "where the author position is"),
                Filter("position", "<=", (2,), "where the author position is at most"),
            ),
            ("position",),
        ),
    ),
    edges=(
        JoinEdge("papers", "venue_id", "venues"),
        JoinEdge("writes", "paper_id", "papers"),
        JoinEdge("writes", "author_id", "authors"),
    ),
)
