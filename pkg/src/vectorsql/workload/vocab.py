"""Topic vocabulary for the synthetic scholarly corpus.

Each topic carries three phrasings of the same intent: short entity keywords,
a concept-level description and a reasoning-level description. Abstracts and
bios are assembled from the topic's words, so the hashing embedder places
texts of the same topic near each other.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Topic:
    name: str
    entities: tuple[str, ...]
    concept: str
    reasoning: str
    words: tuple[str, ...]


TOPICS: tuple[Topic, ...] = (
    Topic(
        "query optimization",
        ("join ordering", "cardinality estimation", "cost model", "plan enumeration"),
        "techniques for choosing fast execution plans for relational queries",
        "methods that learn from past workloads to pick cheaper query plans without hand tuned cost formulas",
        ("optimizer", "plan", "join", "cardinality", "cost", "selectivity", "rewrite", "enumeration"),
    ),
    Topic(
        "vector search",
        ("hnsw", "product quantization", "nearest neighbor graph", "ivf index"),
        "approximate similarity search over high dimensional embeddings",
        "indexes that trade a little accuracy for large speedups when matching embeddings under attribute filters",
        ("vector", "embedding", "graph", "neighbor", "quantization", "recall", "similarity", "ann"),
    ),
    Topic(
        "transaction processing",
        ("two phase locking", "snapshot isolation", "mvcc", "deadlock detection"),
        "concurrency control for correct concurrent updates",
        "protocols that keep many simultaneous writers consistent while avoiding heavy lock contention",
        ("transaction", "lock", "isolation", "commit", "serializable", "abort", "log", "concurrency"),
    ),
    Topic(
        "storage engines",
        ("b tree", "lsm tree", "buffer pool", "write ahead log"),
        "on disk data structures for durable key value storage",
        "designs that balance write amplification against read latency for persistent indexes",
        ("page", "disk", "compaction", "btree", "lsm", "buffer", "flush", "storage"),
    ),
    Topic(
        "distributed databases",
        ("raft consensus", "sharding", "geo replication", "spanner"),
        "data systems spread across many machines and regions",
        "systems that keep replicas across continents consistent while surviving node failures",
        ("replica", "shard", "consensus", "partition", "leader", "failover", "cluster", "region"),
    ),
    Topic(
        "stream processing",
        ("windowed aggregation", "watermarks", "exactly once", "kafka"),
        "continuous computation over unbounded event streams",
        "engines that produce timely answers over late and out of order events without losing results",
        ("stream", "event", "window", "latency", "watermark", "operator", "state", "pipeline"),
    ),
    Topic(
        "text to sql",
        ("schema linking", "sql generation", "spider benchmark", "semantic parsing"),
        "translating natural language questions into database queries",
        "language interfaces that let non experts ask data questions and receive correct executable queries",
        ("question", "language", "parser", "schema", "generation", "llm", "sql", "translation"),
    ),
    Topic(
        "data cleaning",
        ("entity resolution", "deduplication", "outlier detection", "missing values"),
        "repairing errors and inconsistencies in collected data",
        "pipelines that find records describing the same real world object despite typos and format drift",
        ("clean", "duplicate", "error", "repair", "record", "match", "quality", "noise"),
    ),
    Topic(
        "graph analytics",
        ("pagerank", "subgraph matching", "community detection", "shortest paths"),
        "analysis of large networks of connected entities",
        "algorithms that find influential or tightly knit groups inside web scale link structures",
        ("graph", "vertex", "edge", "traversal", "community", "path", "network", "centrality"),
    ),
    Topic(
        "learned indexes",
        ("recursive model index", "learned bloom filter", "piecewise linear model", "alex index"),
        "replacing classic index structures with trained models",
        "structures that predict where a key lives from the data distribution instead of walking a tree",
        ("model", "learned", "prediction", "error", "position", "regression", "key", "index"),
    ),
    Topic(
        "privacy",
        ("differential privacy", "k anonymity", "secure aggregation", "federated learning"),
        "protecting individuals while sharing aggregate statistics",
        "mechanisms that release useful population statistics while bounding what leaks about any one person",
        ("privacy", "noise", "budget", "anonymity", "secure", "leak", "federated", "sensitive"),
    ),
    Topic(
        "data visualization",
        ("dashboards", "chart recommendation", "visual analytics", "olap cubes"),
        "presenting query results as interactive charts",
        "tools that suggest which chart best reveals a trend hidden in a wide analytical table",
        ("chart", "visual", "dashboard", "interactive", "plot", "cube", "explore", "insight"),
    ),
)

COUNTRIES = ("US", "CN", "DE", "FR", "UK", "JP", "CA", "IN")
TIERS = ("A*", "A", "B", "C")
AFFILIATIONS = (
    "north lab",
    "east institute",
    "west university",
    "south college",
    "central research",
    "harbor tech",
    "ridge university",
    "valley institute",
)
FIRST_NAMES = ("ada", "bo", "chen", "dara", "eli", "fay", "gus", "hana", "ivo", "jun", "kai", "lea", "mo", "nia")
LAST_NAMES = ("smith", "li", "garcia", "kumar", "muller", "sato", "okafor", "rossi", "novak", "silva", "kim", "berg")
VENUE_WORDS = ("conference", "symposium", "workshop", "journal", "transactions", "forum")
FILLER = ("we", "propose", "study", "present", "evaluate", "novel", "approach", "system", "results", "show")
