"""Command-line interface: ``vectorsql <command> ...``.

Shared flags take their defaults from the environment: ``VECTORSQL_SEED``,
``VECTORSQL_TIMEOUT``, ``VECTORSQL_WORKERS`` and ``VECTORSQL_OUT``. Explicit
flags win over the environment.

Exit codes: 0 on success, 1 when a query fails to parse or execute, 2 on
configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, replace
from pathlib import Path
from typing import Any, Optional, Sequence

ENV_PREFIX = "VECTORSQL_"


def _env(name: str, default: Any, cast: Any = str) -> Any:
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None or raw == "":
        return default
    try:
        return cast(raw)
    except ValueError as exc:
        raise SystemExit(f"error: bad value for {ENV_PREFIX}{name}: {raw!r}") from exc


def _common(p: argparse.ArgumentParser, seed: bool = True, timeout: bool = False, workers: bool = False,
            out: bool = True) -> None:
    if seed:
        p.add_argument("--seed", type=int, default=_env("SEED", 0, int))
    if timeout:
        p.add_argument("--timeout", type=float, default=_env("TIMEOUT", 60.0, float))
    if workers:
        p.add_argument("--workers", type=int, default=_env("WORKERS", 1, int))
    if out:
        p.add_argument("--out", default=_env("OUT", None))


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _result_json(rs: Any) -> dict:
    return {
        "columns": list(rs.columns),
        "rows": [{"id": list(r.row_id), "values": list(r.values), "distance": r.distance} for r in rs.rows],
        "truncated": rs.truncated,
    }


def cmd_gen(args: argparse.Namespace) -> int:
    from .workload.config import config_from_dict, generate, write_workload

    doc = json.loads(Path(args.cells).read_text()) if args.cells else {}
    doc["seed"] = args.seed
    config = config_from_dict(doc)
    out = Path(args.out or "workload-out")
    out.mkdir(parents=True, exist_ok=True)
    store, samples = generate(config)
    store.save(out / "store")
    write_workload(out / "workload.jsonl", samples)
    print(f"wrote {len(samples)} samples to {out / 'workload.jsonl'} and store to {out / 'store'}")
    return 0


def cmd_index(args: argparse.Namespace) -> int:
    from .engine.store import HybridStore

    store = HybridStore.load(args.db)
    if args.action == "build":
        changes = {k: v for k, v in (("m", args.m), ("ef_construction", args.ef_construction),
                                     ("ef_search", args.ef_search)) if v is not None}
        if changes:
            store = HybridStore(store.schema, store.tables, replace(store.params, **changes))
        store.build_indexes()
        store.save(args.out or args.db)
        print(f"built indexes under {args.out or args.db}")
        return 0
    stats = {}
    for t in store.schema.tables:
        for vc in t.vector_columns:
            s = asdict(store.index(t.name, vc.name).stats())
            s["metric"] = vc.metric.value
            stats[f"{t.name}.{vc.name}"] = s
    _emit(json.dumps(stats, indent=2, sort_keys=True) + "\n", args.out)
    return 0


def _read_query(args: argparse.Namespace) -> str:
    if args.sql:
        return args.sql
    if args.query == "-":
        return sys.stdin.read()
    return Path(args.query).read_text()


def cmd_exec(args: argparse.Namespace) -> int:
    from .engine.executor import execute
    from .engine.store import HybridStore
    from .engine.strategy import parse_strategy
    from .errors import VectorSqlError

    strategy = parse_strategy(args.strategy)
    store = HybridStore.load(args.db)
    try:
        rs = execute(store, _read_query(args), strategy, timeout=args.timeout)
    except VectorSqlError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    _emit(json.dumps(_result_json(rs), sort_keys=True) + "\n", args.out)
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    from .bench import ScoreRecord, report_degradation, score_sample, write_scores
    from .engine.store import HybridStore
    from .engine.strategy import PreFilter
    from .metrics import ScoreReport
    from .workload.config import read_workload

    gold = read_workload(args.gold)
    preds = {}
    with open(args.pred, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                preds[str(obj["id"])] = obj
    store = HybridStore.load(args.db) if args.db else None
    records = []
    for sample in gold:
        p = preds.get(sample.id, {})
        k = args.k or sample.top_k
        lab = sample.label
        meta = (sample.id, "pred", lab.structural.value, lab.integration.value, lab.intent.value, k)
        if "result" in p:
            ids = [tuple(x) if isinstance(x, list) else (x,) for x in p["result"]]
            records.append(ScoreRecord(*meta, ScoreReport.score(ids, sample.golden, k), result_size=len(ids)))
        elif p.get("sql"):
            if store is None:
                print("error: predictions carry only SQL; pass --db to execute them", file=sys.stderr)
                return 2
            rec = score_sample(store, replace(sample, top_k=k), PreFilter(), p["sql"], timeout=args.timeout,
                               with_components=True)
            records.append(replace(rec, strategy="pred"))
        else:
            records.append(ScoreRecord(*meta, ScoreReport(0.0, 0.0, 0.0, 0.0, 0, 0.0, False),
                                       error="missing prediction"))
    out = Path(args.out) if args.out else None
    table = report_degradation(records)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        write_scores(out / "scores.jsonl", records)
        (out / "aggregate.csv").write_text(table.to_csv())
    sys.stdout.write(table.to_csv())
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    from .bench import RunConfig, run_benchmark

    config = RunConfig(
        seed=args.seed,
        store_path=args.db,
        workload_path=args.workload,
        strategies=tuple(s for s in args.strategies.split(";") if s),
        k_prime=tuple(float(x) for x in args.k_prime.split(",") if x),
        timeout=args.timeout,
        out_dir=args.out or "bench-out",
        workers=args.workers,
        predictions_path=args.predictions,
        fixture=args.fixture,
    )
    table = run_benchmark(config)
    sys.stdout.write(table.to_csv())
    return 0


def cmd_transpile(args: argparse.Namespace) -> int:
    from .embedding import default_embedder
    from .errors import VectorSqlError
    from .sql.parser import parse
    from .sql.transpile import transpile

    try:
        query = parse(Path(args.input).read_text() if args.input != "-" else sys.stdin.read())
    except VectorSqlError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    vectors = json.loads(Path(args.vectors).read_text()) if args.vectors else {}
    if args.embed_missing:
        from . import ast as A

        emb = default_embedder(args.embedder, args.dim)
        for text in A.embed_texts(query):
            vectors.setdefault(text, emb.embed_array(text).tolist())
    try:
        out = transpile(query, args.dialect, vectors)
    except (KeyError, VectorSqlError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(out.sql + "\n", args.out)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    from .bench import read_scores, report_degradation

    table = report_degradation(read_scores(args.scores))
    _emit(table.to_json() if args.format == "json" else table.to_csv(), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vectorsql", description="Hybrid vector-relational SQL toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a seeded store and workload")
    p.add_argument("--cells", help="declarative workload config (JSON)")
    _common(p)
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("index", help="build or inspect graph indexes")
    p.add_argument("action", choices=("build", "stats"))
    p.add_argument("--db", required=True, help="store snapshot directory")
    p.add_argument("--m", type=int)
    p.add_argument("--ef-construction", type=int)
    p.add_argument("--ef-search", type=int)
    _common(p, seed=False)
    p.set_defaults(fn=cmd_index)

    p = sub.add_parser("exec", help="execute one query")
    p.add_argument("--db", required=True)
    p.add_argument("--strategy", default="pre", help="pre | post[:K|:xM] | iter[:BATCH,MAX]")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--query", help="file with the query ('-' for stdin)")
    g.add_argument("--sql", help="query text")
    _common(p, seed=False, timeout=True)
    p.set_defaults(fn=cmd_exec)

    p = sub.add_parser("score", help="score predictions against a workload")
    p.add_argument("--pred", required=True, help="JSONL of {id, sql?, result?}")
    p.add_argument("--gold", required=True, help="workload JSONL")
    p.add_argument("--db", help="store snapshot, needed for SQL-only predictions")
    p.add_argument("--k", type=int, help="nDCG cutoff (default: each sample's top_k)")
    _common(p, seed=False, timeout=True)
    p.set_defaults(fn=cmd_score)

    p = sub.add_parser("bench", help="run a strategy sweep")
    p.add_argument("--db", help="store snapshot directory")
    p.add_argument("--workload", help="workload JSONL")
    p.add_argument("--fixture", choices=("degradation",), help="use a built-in seeded fixture")
    p.add_argument("--strategies", default="pre;post;iter", help="';'-separated strategy specs")
    p.add_argument("--k-prime", default="1", help="comma-separated multipliers for bare 'post'")
    p.add_argument("--predictions", help="JSONL of {id, sql} to execute instead of the gold SQL")
    _common(p, timeout=True, workers=True)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("transpile", help="render a query for a backend dialect")
    p.add_argument("--dialect", required=True, choices=("canonical", "sqlite-vec", "pgvector", "clickhouse"))
    p.add_argument("--in", dest="input", required=True, help="query file ('-' for stdin)")
    p.add_argument("--vectors", help="JSON object mapping EMBED text to a vector")
    p.add_argument("--embed-missing", action="store_true", help="embed texts missing from --vectors")
    p.add_argument("--embedder", default="hash64")
    p.add_argument("--dim", type=int, default=64)
    _common(p, seed=False)
    p.set_defaults(fn=cmd_transpile)

    p = sub.add_parser("report", help="degradation table from a scores.jsonl")
    p.add_argument("--scores", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    _common(p, seed=False)
    p.set_defaults(fn=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        from .errors import SnapshotFormatError

        if isinstance(exc, SnapshotFormatError):
            print(f"error: {exc}", file=sys.stderr)
            return 2
        raise


if __name__ == "__main__":
    sys.exit(main())
