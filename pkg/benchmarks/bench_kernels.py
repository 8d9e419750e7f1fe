"""Compare the compiled and pure-Python graph kernels.

Builds the same index with each available backend, checks the graphs and
search results agree, and reports build time and search throughput.

    python3 benchmarks/bench_kernels.py [--n 2000] [--dim 32] [--queries 200]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from vectorsql.index import hnsw, kernels
from vectorsql.index.exact import ExactStore, knn_exact
from vectorsql.model import Metric


def run(backend: str, module, ids, data, queries, metric: Metric, k: int) -> dict:
    saved = (kernels.distances, kernels.search_layer, kernels.select_neighbors, kernels.BACKEND)
    kernels.distances, kernels.search_layer = module.distances, module.search_layer
    kernels.select_neighbors, kernels.BACKEND = module.select_neighbors, module.BACKEND
    try:
        t0 = time.perf_counter()
        index = hnsw.AnnIndex.build(ids, data, metric, seed=7)
        build = time.perf_counter() - t0
        t0 = time.perf_counter()
        results = [index.search(q, k) for q in queries]
        search = time.perf_counter() - t0
    finally:
        kernels.distances, kernels.search_layer, kernels.select_neighbors, kernels.BACKEND = saved
    return {"backend": backend, "build_s": build, "qps": len(queries) / search, "results": results, "index": index}


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--dim", type=int, default=32)
    ap.add_argument("--queries", type=int, default=200)
    ap.add_argument("--k", type=int, default=10)
    ap.add_argument("--metric", default="l2", choices=[m.value for m in Metric])
    args = ap.parse_args()

    rng = np.random.default_rng(7)
    data = rng.standard_normal((args.n, args.dim))
    ids = np.arange(args.n)
    queries = rng.standard_normal((args.queries, args.dim))
    metric = Metric(args.metric)
    store = ExactStore(ids, data, metric)
    truth = [{i for i, _ in knn_exact(store, q, args.k)} for q in queries]

    runs = [run(name, mod, ids, data, queries, metric, args.k) for name, mod in kernels.available_backends().items()]
    print(f"n={args.n} dim={args.dim} queries={args.queries} k={args.k} metric={metric.value}")
    print(f"{'backend':<8} {'build s':>9} {'queries/s':>10} {'recall@k':>9}")
    for r in runs:
        hits = sum(len(t & {i for i, _ in res}) for t, res in zip(truth, r["results"]))
        print(f"{r['backend']:<8} {r['build_s']:>9.3f} {r['qps']:>10.1f} {hits / (args.k * len(truth)):>9.4f}")
    if len(runs) == 2:
        a, b = runs  # python, cython
        same_graph = all(np.array_equal(x, y) for x, y in zip(a["index"].neighbors, b["index"].neighbors))
        same_ids = all([i for i, _ in x] == [i for i, _ in y] for x, y in zip(a["results"], b["results"]))
        max_dd = max(abs(dx - dy) for x, y in zip(a["results"], b["results"]) for (_, dx), (_, dy) in zip(x, y))
        print(f"identical graphs: {same_graph}; identical result ids: {same_ids}; max distance diff: {max_dd:.2e}")
        print(f"compiled build speedup: {a['build_s'] / b['build_s']:.1f}x")


if __name__ == "__main__":
    main()
