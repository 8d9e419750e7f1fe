"""Strategy sweeps over a workload and the recall-degradation table.

Outputs written by :func:`run_benchmark` into ``out_dir``:

``scores.jsonl``
    one :class:`ScoreRecord` per (sample, strategy), sorted by sample id then
    strategy order.
``aggregate.csv`` / ``aggregate.json``
    :class:`DegradationTable`: one row per strategy, mean precision, recall
    and F1 per integration depth, then mean nDCG, execution-success rate
    and sample count.
``run.json``
    the effective configuration.

Nothing time-dependent is written, so equal configs give equal bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Union

from . import ast as A
from .embedding import Embedder
from .engine.executor import execute
from .engine.store import HybridStore
from .engine.strategy import ExecStrategy, PostFilter, parse_strategy
from .errors import ParseError
from .metrics import ScoreReport, acc_sql, acc_vec, vector_columns_of
from .model import BenchmarkSample, Integration
from .sql.parser import parse

INTEGRATIONS = (Integration.NON, Integration.WHERE, Integration.JOIN)
METRIC_KEYS = (("P", "precision"), ("R", "recall"), ("F1", "f1"))


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    store_path: Optional[str] = None
    workload_path: Optional[str] = None
    strategies: tuple[str, ...] = ("pre", "post", "iter")
    # multipliers over k used wherever a bare "post" appears
    k_prime: tuple[float, ...] = (1.0,)
    timeout: float = 60.0
    out_dir: str = "bench-out"
    workers: int = 1
    predictions_path: Optional[str] = None
    # "degradation" builds the seeded fixture instead of reading paths
    fixture: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.strategies:
            raise ValueError("strategy list must be non-empty")
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not self.k_prime:
            raise ValueError("k' schedule must be non-empty")
        if self.fixture not in (None, "degradation"):
            raise ValueError(f"unknown fixture {self.fixture!r}")
        if self.fixture is None and (self.store_path is None or self.workload_path is None):
            raise ValueError("give store_path and workload_path, or a fixture")
        self.expanded_strategies()

    def expanded_strategies(self) -> list[ExecStrategy]:
        out: dict[str, ExecStrategy] = {}
        for text in self.strategies:
            if text.strip().lower() == "post":
                for m in self.k_prime:
                    s: ExecStrategy = PostFilter(multiplier=float(m))
                    out.setdefault(str(s), s)
            else:
                s = parse_strategy(text)
                out.setdefault(str(s), s)
        return list(out.values())


@dataclass(frozen=True)
class ScoreRecord:
    sample_id: str
    strategy: str
    structural: str
    integration: str
    intent: str
    top_k: int
    report: ScoreReport
    truncated: bool = False
    result_size: int = 0
    error: Optional[str] = None

    def to_dict(self) -> dict[str, Any]:
        d = {k: v for k, v in asdict(self).items() if k != "report"}
        d.update(asdict(self.report))
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ScoreRecord":
        fields_ = {k: d[k] for k in ScoreReport.CSV_FIELDS}
        return cls(
            d["sample_id"], d["strategy"], d["structural"], d["integration"], d["intent"], int(d["top_k"]),
            ScoreReport(**fields_), bool(d.get("truncated", False)), int(d.get("result_size", 0)), d.get("error"),
        )


def load_predictions(path: Union[str, Path]) -> dict[str, dict]:
    """JSONL of ``{"id": ..., "sql": ...}``; later lines override earlier ones."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                out[str(obj["id"])] = obj
    return out


def score_sample(
    store: HybridStore,
    sample: BenchmarkSample,
    strategy: ExecStrategy,
    pred_sql: Optional[str] = None,
    embedder: Optional[Embedder] = None,
    timeout: float = 60.0,
    with_components: bool = False,
) -> ScoreRecord:
    """Execute ``pred_sql`` (default: the sample's SQL) and score it against the golden set.

    Any failure yields a zero report with ``execution_success`` false.
    """
    label = sample.label
    base = dict(
        sample_id=sample.id,
        strategy=str(strategy),
        structural=label.structural.value,
        integration=label.integration.value,
        intent=label.intent.value,
        top_k=sample.top_k,
    )
    sql = sample.sql if pred_sql is None else pred_sql
    a_sql = a_vec = None
    try:
        query = parse(sql)
        if with_components:
            gold_q = parse(sample.sql)
            a_sql = acc_sql(query, gold_q, store.schema)
            a_vec = acc_vec(query, vector_columns_of(gold_q, store.schema), None, sample.keywords,
                            embedder or _column_embedder(store, gold_q), store.schema)
        result = execute(store, query, strategy, embedder=embedder, timeout=timeout)
    except Exception as exc:  # recorded, never fatal
        rep = ScoreReport.failed()
        if a_sql is not None:
            rep = ScoreReport(0.0, 0.0, 0.0, 0.0, a_sql, a_vec, False)
        elif with_components and isinstance(exc, ParseError):
            rep = ScoreReport(0.0, 0.0, 0.0, 0.0, 0, 0.0, False)
        return ScoreRecord(**base, report=rep, error=f"{type(exc).__name__}: {exc}")
    rep = ScoreReport.score(result, sample.golden, sample.top_k, a_sql, a_vec)
    return ScoreRecord(**base, report=rep, truncated=result.truncated, result_size=len(result))


def _column_embedder(store: HybridStore, query: A.Select) -> Embedder:
    from .embedding import default_embedder

    for t in store.schema.tables:
        for vc in t.vector_columns:
            return default_embedder(vc.embedder, vc.dim)
    return default_embedder()


def _mean(values: Sequence[float]) -> Optional[float]:
    return math.fsum(values) / len(values) if values else None


@dataclass(frozen=True)
class DegradationTable:
    strategies: tuple[str, ...]
    columns: tuple[str, ...]
    values: dict[str, dict[str, Optional[float]]] = field(hash=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("strategy",) + self.columns)
        for s in self.strategies:
            row = self.values[s]
            w.writerow([s] + ["" if row[c] is None else repr(row[c]) for c in self.columns])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {"columns": list(self.columns), "rows": [{"strategy": s, **self.values[s]} for s in self.strategies]}
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"


TABLE_COLUMNS: tuple[str, ...] = tuple(f"{i.value}_{short}" for i in INTEGRATIONS for short, _ in METRIC_KEYS) + (
    "ndcg",
    "success_rate",
    "n",
)


def report_degradation(scores: Iterable[ScoreRecord]) -> DegradationTable:
    """Mean P/R/F1 per (strategy, integration depth); strategies in first-seen order."""
    records = list(scores)
    if not records:
        raise ValueError("no score records to aggregate")
    strategies: list[str] = []
    for r in records:
        if r.strategy not in strategies:
            strategies.append(r.strategy)
    values: dict[str, dict[str, Optional[float]]] = {}
    for s in strategies:
        mine = [r for r in records if r.strategy == s]
        row: dict[str, Optional[float]] = {}
        for integ in INTEGRATIONS:
            cell = [r.report for r in mine if r.integration == integ.value]
            for short, attr in METRIC_KEYS:
                row[f"{integ.value}_{short}"] = _mean([getattr(rep, attr) for rep in cell])
        row["ndcg"] = _mean([r.report.ndcg_at_k for r in mine])
        row["success_rate"] = _mean([1.0 if r.report.execution_success else 0.0 for r in mine])
        row["n"] = float(len(mine))
        values[s] = row
    return DegradationTable(tuple(strategies), TABLE_COLUMNS, values)


def load_inputs(config: RunConfig) -> tuple[HybridStore, list[BenchmarkSample]]:
    if config.fixture == "degradation":
        from .workload.fixtures import degradation_fixture

        fx = degradation_fixture(config.seed)
        return fx.store, list(fx.samples)
    from .workload.config import read_workload

    for p in (config.store_path, config.workload_path):
        if not Path(p).exists():
            raise FileNotFoundError(p)
    return HybridStore.load(config.store_path), read_workload(config.workload_path)


def run_samples(
    store: HybridStore,
    samples: Sequence[BenchmarkSample],
    strategies: Sequence[ExecStrategy],
    workers: int = 1,
    timeout: float = 60.0,
    predictions: Optional[dict[str, dict]] = None,
    embedder: Optional[Embedder] = None,
) -> list[ScoreRecord]:
    store.build_indexes()
    order = {str(s): i for i, s in enumerate(strategies)}
    tasks = [(sample, strat) for sample in samples for strat in strategies]

    def run(task: tuple[BenchmarkSample, ExecStrategy]) -> ScoreRecord:
        sample, strat = task
        if predictions is None:
            return score_sample(store, sample, strat, None, embedder, timeout)
        pred = predictions.get(sample.id)
        if pred is None or not pred.get("sql"):
            label = sample.label
            return ScoreRecord(sample.id, str(strat), label.structural.value, label.integration.value,
                               label.intent.value, sample.top_k, ScoreReport(0.0, 0.0, 0.0, 0.0, 0, 0.0, False),
                               error="missing prediction")
        return score_sample(store, sample, strat, pred["sql"], embedder, timeout, with_components=True)

    if workers == 1:
        records = [run(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run, tasks))
    records.sort(key=lambda r: (r.sample_id, order[r.strategy]))
    return records


def write_scores(path: Union[str, Path], records: Iterable[ScoreRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")


def read_scores(path: Union[str, Path]) -> list[ScoreRecord]:
    with open(path, encoding="utf-8") as fh:
        return [ScoreRecord.from_dict(json.loads(line)) for line in fh if line.strip()]


def run_benchmark(config: RunConfig) -> DegradationTable:
    store, samples = load_inputs(config)
    predictions = load_predictions(config.predictions_path) if config.predictions_path else None
    records = run_samples(store, samples, config.expanded_strategies(), config.workers, config.timeout, predictions)
    table = report_degradation(records)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_scores(out / "scores.jsonl", records)
    (out / "aggregate.csv").write_text(table.to_csv())
    (out / "aggregate.json").write_text(table.to_json())
    (out / "run.json").write_text(json.dumps(asdict(config), indent=2, sort_keys=True) + "\n")
    return table
