import csv
import json
import math

import pytest

from vectorsql.bench import RunConfig, ScoreRecord, read_scores, report_degradation, run_benchmark
from vectorsql.cli import main
from vectorsql.metrics import ScoreReport

CONFIG = {
    "seed": 2,
    "sizes": {"venues": 20, "papers": 150, "authors": 80},
    "embedder": {"dim": 32},
    "count": 1,
}


@pytest.fixture(scope="module")
def workload(tmp_path_factory):
    root = tmp_path_factory.mktemp("gen")
    (root / "cfg.json").write_text(json.dumps(CONFIG))
    assert main(["gen", "--cells", str(root / "cfg.json"), "--out", str(root / "w")]) == 0
    return root / "w"


def rec(sid, strategy, integration, p, r):
    f = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return ScoreRecord(sid, strategy, "Easy", integration, "Entity", 5, ScoreReport(p, r, f, r))


def test_report_one_sample_per_cell():
    recs = [rec("a", "pre", "Non", 1.0, 1.0), rec("b", "pre", "Where", 0.5, 0.25), rec("c", "pre", "Join", 0.0, 0.0)]
    t = report_degradation(recs)
    row = t.values["pre"]
    assert (row["Non_R"], row["Where_P"], row["Where_R"], row["Join_F1"]) == (1.0, 0.5, 0.25, 0.0)
    assert row["n"] == 3.0 and row["success_rate"] == 1.0
    assert t.to_csv().splitlines()[0].split(",")[:4] == ["strategy", "Non_P", "Non_R", "Non_F1"]
    with pytest.raises(ValueError):
        report_degradation([])


def test_missing_cells_are_blank():
    t = report_degradation([rec("a", "pre", "Non", 1.0, 1.0)])
    assert t.values["pre"]["Join_R"] is None
    assert ",," in t.to_csv()


def test_run_config_errors(tmp_path):
    for kwargs in ({"strategies": ()}, {"timeout": 0}, {"workers": 0}, {"fixture": "nope"}, {"k_prime": ()},
                   {"strategies": ("bogus",)}):
        with pytest.raises(ValueError):
            RunConfig(**{"fixture": "degradation", **kwargs})
    with pytest.raises(ValueError):
        RunConfig(store_path="x")
    cfg = RunConfig(fixture="degradation", strategies=("pre", "post", "iter:5,3"), k_prime=(1, 2, 1))
    assert [str(s) for s in cfg.expanded_strategies()] == ["pre", "post:x1", "post:x2", "iter:5,3"]


def test_bench_outputs(workload, tmp_path):
    cfg = RunConfig(seed=2, store_path=str(workload / "store"), workload_path=str(workload / "workload.jsonl"),
                    strategies=("pre", "post", "iter"), k_prime=(1.0, 4.0), out_dir=str(tmp_path / "a"), workers=2)
    table = run_benchmark(cfg)
    out = tmp_path / "a"
    assert sorted(p.name for p in out.iterdir()) == ["aggregate.csv", "aggregate.json", "run.json", "scores.jsonl"]
    pre = table.values["pre"]
    assert all(pre[f"{i}_R"] == 1.0 for i in ("Non", "Where", "Join"))
    assert pre["success_rate"] == 1.0
    # aggregates recompute from the per-sample file
    records = read_scores(out / "scores.jsonl")
    for strategy, row in table.values.items():
        for integ in ("Non", "Where", "Join"):
            mine = [r.report.recall for r in records if r.strategy == strategy and r.integration == integ]
            assert abs(row[f"{integ}_R"] - math.fsum(mine) / len(mine)) <= 1e-12
    # the serial run writes the same bytes
    run_benchmark(RunConfig(**{**cfg.__dict__, "out_dir": str(tmp_path / "b"), "workers": 1}))
    assert (tmp_path / "b" / "aggregate.csv").read_bytes() == (out / "aggregate.csv").read_bytes()
    assert (tmp_path / "b" / "scores.jsonl").read_bytes() == (out / "scores.jsonl").read_bytes()


def test_bench_records_bad_predictions(workload, tmp_path):
    samples = [json.loads(l) for l in (workload / "workload.jsonl").read_text().splitlines()]
    preds = tmp_path / "pred.jsonl"
    lines = [{"id": samples[0]["id"], "sql": "SELEC nonsense"}, {"id": samples[1]["id"], "sql": samples[1]["sql"]}]
    preds.write_text("".join(json.dumps(l) + "\n" for l in lines))
    cfg = RunConfig(store_path=str(workload / "store"), workload_path=str(workload / "workload.jsonl"),
                    strategies=("pre",), predictions_path=str(preds), out_dir=str(tmp_path / "o"))
    run_benchmark(cfg)
    recs = {r.sample_id: r for r in read_scores(tmp_path / "o" / "scores.jsonl")}
    assert recs[samples[0]["id"]].error.startswith("SqlSyntaxError")
    assert recs[samples[1]["id"]].report.acc_sql == 1
    assert recs[samples[1]["id"]].report.recall == 1.0
    assert recs[samples[2]["id"]].error == "missing prediction"


def test_cli_commands(workload, tmp_path, capsys, monkeypatch):
    db = str(workload / "store")
    assert main(["index", "build", "--db", db, "--m", "8", "--out", str(tmp_path / "db")]) == 0
    assert main(["index", "stats", "--db", str(tmp_path / "db"), "--out", str(tmp_path / "stats.json")]) == 0
    stats = json.loads((tmp_path / "stats.json").read_text())
    assert stats["papers.abstract_vec"]["m"] == 8
    assert stats["papers.abstract_vec"]["reachable"] == stats["papers.abstract_vec"]["size"]

    sql = "SELECT id FROM papers WHERE year > 2015 ORDER BY DISTANCE(abstract_vec, EMBED('graph')) LIMIT 3"
    assert main(["exec", "--db", db, "--sql", sql, "--strategy", "post:x2", "--out", str(tmp_path / "r.json")]) == 0
    res = json.loads((tmp_path / "r.json").read_text())
    assert res["columns"] == ["id"] and len(res["rows"]) <= 3
    assert main(["exec", "--db", db, "--sql", "SELEC"]) == 1
    assert main(["exec", "--db", str(tmp_path / "missing"), "--sql", sql]) == 2
    assert main(["exec", "--db", db, "--sql", sql, "--strategy", "nope"]) == 2

    q = tmp_path / "q.sql"
    q.write_text(sql)
    assert main(["transpile", "--dialect", "pgvector", "--in", str(q), "--embed-missing", "--embedder", "hash32", "--dim", "32",
                 "--out", str(tmp_path / "t.sql")]) == 0
    assert "<->" in (tmp_path / "t.sql").read_text()
    assert main(["transpile", "--dialect", "pgvector", "--in", str(q)]) == 1

    capsys.readouterr()
    monkeypatch.setenv("VECTORSQL_OUT", str(tmp_path / "bench"))
    assert main(["bench", "--db", db, "--workload", str(workload / "workload.jsonl"), "--strategies", "pre;post:x1"]) == 0
    printed = capsys.readouterr().out
    assert printed == (tmp_path / "bench" / "aggregate.csv").read_text()
    assert [r[0] for r in csv.reader(printed.splitlines())][1:] == ["pre", "post:x1"]
    monkeypatch.delenv("VECTORSQL_OUT")

    assert main(["report", "--scores", str(tmp_path / "bench" / "scores.jsonl"), "--format", "json",
                 "--out", str(tmp_path / "rep.json")]) == 0
    assert [r["strategy"] for r in json.loads((tmp_path / "rep.json").read_text())["rows"]] == ["pre", "post:x1"]

    samples = [json.loads(l) for l in (workload / "workload.jsonl").read_text().splitlines()]
    pred = tmp_path / "p.jsonl"
    pred.write_text("".join(json.dumps({"id": s["id"], "sql": s["sql"]}) + "\n" for s in samples))
    assert main(["score", "--pred", str(pred), "--gold", str(workload / "workload.jsonl"), "--db", db,
                 "--out", str(tmp_path / "score")]) == 0
    scored = read_scores(tmp_path / "score" / "scores.jsonl")
    assert all(r.report.acc_sql == 1 and r.report.recall == 1.0 for r in scored)
    assert main(["score", "--pred", str(pred), "--gold", str(workload / "workload.jsonl")]) == 2
    assert main(["bench", "--workload", "x"]) == 2
