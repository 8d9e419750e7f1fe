"""Pure-Python/numpy implementation of the graph-search kernels.

Mirrors ``_kernels.pyx`` operation for operation, including heap tie-breaking,
so both backends walk the graph identically given identical distances.

Metric codes: 0 = L2, 1 = cosine on pre-normalized rows (1 - dot), 2 = -dot.
"""

from __future__ import annotations

import heapq

import numpy as np

BACKEND = "python"


def distances(data: np.ndarray, q: np.ndarray, idx: np.ndarray, metric: int) -> np.ndarray:
    rows = data[idx]
    if metric == 0:
        diff = rows - q
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))
    dots = rows @ q
    if metric == 1:
        return 1.0 - dots
    return -dots


def search_layer(
    data: np.ndarray,
    q: np.ndarray,
    entries: np.ndarray,
    ef: int,
    neighbors: np.ndarray,
    degrees: np.ndarray,
    metric: int,
) -> tuple[np.ndarray, np.ndarray]:
    visited: set[int] = set()
    cand: list[tuple[float, int]] = []
    res: list[tuple[float, int]] = []  # (-dist, -idx): top is the furthest result
    fresh = []
    for e in entries.tolist():
        if e not in visited:
            visited.add(e)
            fresh.append(e)
    if fresh:
        for e, d in zip(fresh, distances(data, q, np.asarray(fresh, dtype=np.int64), metric).tolist()):
            heapq.heappush(cand, (d, e))
            heapq.heappush(res, (-d, -e))
            if len(res) > ef:
                heapq.heappop(res)

    while cand:
        d, c = heapq.heappop(cand)
        if len(res) >= ef and d > -res[0][0]:
            break
        deg = int(degrees[c])
        new = []
        for x in neighbors[c, :deg].tolist():
            if x not in visited:
                visited.add(x)
                new.append(x)
        if not new:
            continue
        nd = distances(data, q, np.asarray(new, dtype=np.int64), metric).tolist()
        for x, dx in zip(new, nd):
            if len(res) < ef or dx < -res[0][0]:
                heapq.heappush(cand, (dx, x))
                heapq.heappush(res, (-dx, -x))
                if len(res) > ef:
                    heapq.heappop(res)

    out = sorted((-nd_, -ni) for nd_, ni in res)
    ids = np.fromiter((i for _, i in out), dtype=np.int64, count=len(out))
    dists = np.fromiter((d for d, _ in out), dtype=np.float64, count=len(out))
    return ids, dists


def select_neighbors(
    data: np.ndarray,
    cand: np.ndarray,
    cand_dist: np.ndarray,
    m: int,
    metric: int,
) -> np.ndarray:
    """Diversity heuristic: keep a candidate only if it is closer to the base
    point than to every already selected neighbor; pad with pruned ones."""
    selected: list[int] = []
    pruned: list[int] = []
    for e, de in zip(cand.tolist(), cand_dist.tolist()):
        if len(selected) >= m:
            break
        if selected:
            dr = distances(data, data[e], np.asarray(selected, dtype=np.int64), metric)
            if bool(np.all(de < dr)):
                selected.append(e)
            else:
                pruned.append(e)
        else:
            selected.append(e)
    for e in pruned:
        if len(selected) >= m:
            break
        selected.append(e)
    return np.asarray(selected, dtype=np.int64)
