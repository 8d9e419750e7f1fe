"""Declarative workload configuration and JSONL workload files.

A config is a JSON object; every key is optional::

    {
      "seed": 0,
      "sizes": {"venues": 40, "papers": 400, "authors": 200},
      "embedder": {"dim": 64, "seed": 0},
      "index": {"m": 16, "ef_construction": 128, "ef_search": 64},
      "rubric": {"thresholds": [1, 2, 3], "join": 1, "nested": 1,
                 "group_by": 2, "aggregate": 1, "having": 1},
      "variants": 3,
      "count": 2,
      "cells": [{"structural": "Easy", "integration": "Non",
                 "intent": "Entity", "vector_ops": 1, "count": 2}]
    }

``cells`` defaults to all twelve structural x integration cells, each with
``count`` samples. A workload file holds one ``BenchmarkSample`` per line in
the canonical JSON encoding.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Union

from ..embedding import HashEmbedder
from ..engine.store import HybridStore, IndexParams
from ..model import BenchmarkSample
from ..serialize import dumps, loads
from .complexity import DEFAULT_RUBRIC, Rubric
from .scholar import ScholarSizes, scholar_store
from .synth import ALL_CELLS, ComplexityTarget, generate_workload


@dataclass(frozen=True)
class WorkloadConfig:
    seed: int = 0
    sizes: ScholarSizes = ScholarSizes()
    embedder_dim: int = 64
    embedder_seed: int = 0
    index: IndexParams = IndexParams()
    rubric: Rubric = DEFAULT_RUBRIC
    variants: int = 3
    cells: tuple[tuple[ComplexityTarget, int], ...] = field(
        default_factory=lambda: tuple((ComplexityTarget(s, i), 2) for s, i in ALL_CELLS)
    )

    def embedder(self) -> HashEmbedder:
        return HashEmbedder(self.embedder_dim, self.embedder_seed)


def config_from_dict(doc: Mapping[str, Any]) -> WorkloadConfig:
    known = {"seed", "sizes", "embedder", "index", "rubric", "variants", "count", "cells"}
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    seed = int(doc.get("seed", 0))
    emb = doc.get("embedder", {})
    index = IndexParams(**{"seed": seed, **doc.get("index", {})})
    rub = dict(doc.get("rubric", {}))
    if "thresholds" in rub:
        rub["thresholds"] = tuple(rub["thresholds"])
    count = int(doc.get("count", 2))
    if "cells" in doc:
        cells = []
        for c in doc["cells"]:
            c = dict(c)
            n = int(c.pop("count", count))
            cells.append((ComplexityTarget(**c), n))
    else:
        cells = [(ComplexityTarget(s, i), count) for s, i in ALL_CELLS]
    return WorkloadConfig(
        seed=seed,
        sizes=ScholarSizes(**doc.get("sizes", {})),
        embedder_dim=int(emb.get("dim", 64)),
        embedder_seed=int(emb.get("seed", 0)),
        index=index,
        rubric=Rubric(**rub),
        variants=int(doc.get("variants", 3)),
        cells=tuple(cells),
    )


def load_config(path: Union[str, Path]) -> WorkloadConfig:
    return config_from_dict(json.loads(Path(path).read_text()))


def generate(config: WorkloadConfig) -> tuple[HybridStore, list[BenchmarkSample]]:
    emb = config.embedder()
    store = scholar_store(config.seed, config.sizes, emb, config.index)
    samples = generate_workload(
        store, config.cells, config.seed, rubric=config.rubric, embedder=emb, n_variants=config.variants
    )
    return store, samples


def write_workload(path: Union[str, Path], samples: Iterable[BenchmarkSample]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            fh.write(dumps(s) + "\n")


def read_workload(path: Union[str, Path]) -> list[BenchmarkSample]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = loads(line)
            if not isinstance(obj, BenchmarkSample):
                raise ValueError(f"{path}:{n}: not a BenchmarkSample")
            out.append(obj)
    return out
