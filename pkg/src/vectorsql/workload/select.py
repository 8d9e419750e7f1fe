"""Sample selection: stratified quotas, centroid choice, majority voting, golden sets."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Mapping, Optional, Sequence, TypeVar, Union

import numpy as np

from .. import ast as A
from ..embedding import Embedder
from ..engine.executor import execute
from ..engine.store import HybridStore
from ..engine.strategy import PreFilter
from ..errors import AllCandidatesFailedError, ColumnMismatchError, EmptyGoldError
from ..metrics import rrf_fuse
from ..model import ComplexityLabel, Integration, ResultRow, ResultSet, Structural
from ..sql.parser import parse

Q = TypeVar("Q")
Cell = tuple[Structural, Integration]


@dataclass(frozen=True)
class StratifiedSelection:
    selected: list
    counts: dict[Cell, int]
    shortfall: dict[Cell, int]


def stratified_sample(
    pool: Sequence[tuple[Q, ComplexityLabel]],
    quota: Union[int, Mapping[Cell, int]],
    seed: int,
) -> StratifiedSelection:
    """Draw min(quota, supply) items per cell without replacement.

    Selected items keep their pool order. Cells in a quota mapping that have
    no supply at all are reported as shortfall too.
    """
    by_cell: dict[Cell, list[int]] = {}
    for i, (_, label) in enumerate(pool):
        by_cell.setdefault(label.cell, []).append(i)
    if isinstance(quota, int):
        wanted = {cell: quota for cell in by_cell}
    else:
        wanted = dict(quota)
    rng = np.random.default_rng(seed)
    chosen: list[int] = []
    counts: dict[Cell, int] = {}
    shortfall: dict[Cell, int] = {}
    order = sorted(wanted, key=lambda c: (list(Structural).index(c[0]), list(Integration).index(c[1])))
    for cell in order:
        members = by_cell.get(cell, [])
        want = wanted[cell]
        take = min(want, len(members))
        if take:
            picks = rng.choice(len(members), size=take, replace=False)
            chosen += [members[int(p)] for p in picks]
        counts[cell] = take
        if take < want:
            shortfall[cell] = want - take
    chosen.sort()
    return StratifiedSelection([pool[i] for i in chosen], counts, shortfall)


def centroid_select(candidates: Sequence[str], embedder: Embedder) -> str:
    """The candidate closest (L2) to the mean embedding; first wins ties."""
    if not candidates:
        raise ValueError("need at least one candidate")
    E = np.vstack([np.asarray(embedder.embed_array(t), dtype=np.float64) for t in candidates])
    d = np.linalg.norm(E - E.mean(axis=0), axis=1)
    return candidates[int(np.argmin(d))]


def majority_set(results: Sequence[Sequence[Hashable]]) -> set:
    """Ids present in more than half of ``results``; plurality ids when none qualify."""
    counts = Counter(i for r in results for i in set(r))
    if not counts:
        return set()
    strict = {i for i, c in counts.items() if 2 * c > len(results)}
    if strict:
        return strict
    top = max(counts.values())
    return {i for i, c in counts.items() if c == top}


def majority_vote(candidates: Sequence[tuple[Q, Optional[ResultSet]]]) -> Q:
    """The candidate whose result overlaps the majority set most; failed runs carry ``None``."""
    ok = [(q, r) for q, r in candidates if isinstance(r, ResultSet)]
    if not ok:
        raise AllCandidatesFailedError("no candidate executed successfully")
    majority = majority_set([r.ids for _, r in ok])
    best_q, best = ok[0][0], -1
    for q, r in ok:
        overlap = len(majority & r.id_set())
        if overlap > best:
            best_q, best = q, overlap
    return best_q


def build_golden(
    store: HybridStore,
    variants: Sequence[Union[A.Select, str]],
    k: Optional[int] = None,
    embedder: Optional[Embedder] = None,
) -> ResultSet:
    """Fuse the PreFilter results of equivalent variants with RRF.

    The fused list is the union of all variant results; ``k`` optionally
    truncates it. Rows carry values from the first variant that returned
    them and no distance, since fused order need not follow distance.
    """
    if not variants:
        raise ValueError("need at least one variant")
    results = []
    for v in variants:
        q = parse(v) if isinstance(v, str) else v
        results.append(execute(store, q, PreFilter(), embedder=embedder))
    columns = results[0].columns
    for r in results[1:]:
        if r.columns != columns:
            raise ColumnMismatchError(f"variant columns differ: {r.columns} vs {columns}")
    fused = rrf_fuse([r.ids for r in results])
    if k is not None:
        fused = fused[:k]
    if not fused:
        raise EmptyGoldError("every variant returned an empty result")
    values: dict = {}
    for r in results:
        for row in r.rows:
            values.setdefault(row.row_id, row.values)
    rows = tuple(ResultRow(rid, values[rid]) for rid in fused)
    return ResultSet(columns, rows)
