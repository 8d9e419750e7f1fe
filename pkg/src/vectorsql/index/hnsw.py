"""Hierarchical navigable small-world graph index."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np

from ..errors import DimensionMismatchError
from ..model import Metric, Vector, as_vector
from . import kernels

METRIC_CODES = {Metric.L2: 0, Metric.COSINE: 1, Metric.DOT: 2}
CODE_METRICS = {v: k for k, v in METRIC_CODES.items()}

DEFAULT_M = 16
DEFAULT_EF_CONSTRUCTION = 128
DEFAULT_EF_SEARCH = 64


@dataclass(frozen=True)
class IndexStats:
    size: int
    dim: int
    metric: Metric
    m: int
    ef_construction: int
    ef_search: int
    max_level: int
    layer_sizes: tuple[int, ...]
    mean_degree: float
    reachable: int
    backend: str


class AnnIndex:
    """HNSW graph over a fixed set of vectors.

    Built once through :meth:`build`; immutable afterwards, so concurrent
    searches are safe. Every layer keeps at most ``m`` neighbours per node.
    Internal positions follow ascending external id, which makes the
    kernel's (distance, position) tie-break the same as (distance, id).
    """

    def __init__(
        self,
        dim: int,
        metric: Metric = Metric.L2,
        m: int = DEFAULT_M,
        ef_construction: int = DEFAULT_EF_CONSTRUCTION,
        ef_search: int = DEFAULT_EF_SEARCH,
        seed: int = 0,
    ) -> None:
        if dim < 1:
            raise ValueError("dim must be positive")
        if m < 2:
            raise ValueError("m must be >= 2")
        if ef_construction < 1 or ef_search < 1:
            raise ValueError("ef values must be positive")
        self.dim = dim
        self.metric = Metric(metric)
        self.m = m
        self.ef_construction = ef_construction
        self.ef_search = ef_search
        self.seed = seed
        self._code = METRIC_CODES[self.metric]
        self.ids = np.zeros(0, dtype=np.int64)
        self.data = np.zeros((0, dim), dtype=np.float64)
        self.levels = np.zeros(0, dtype=np.int32)
        self.neighbors: list[np.ndarray] = []
        self.degrees: list[np.ndarray] = []
        self.entry = -1
        self.max_level = -1

    # construction

    @classmethod
    def build(
        cls,
        ids: Iterable[int],
        vectors: Union[np.ndarray, list],
        metric: Metric = Metric.L2,
        m: int = DEFAULT_M,
        ef_construction: int = DEFAULT_EF_CONSTRUCTION,
        ef_search: int = DEFAULT_EF_SEARCH,
        seed: int = 0,
    ) -> "AnnIndex":
        ids_arr = np.asarray(list(ids), dtype=np.int64)
        mat = np.asarray(vectors, dtype=np.float64)
        if mat.ndim != 2 or mat.shape[0] != ids_arr.shape[0]:
            raise ValueError("vectors must be a 2-d array aligned with ids")
        if mat.shape[0] and not np.all(np.isfinite(mat)):
            raise ValueError("vectors must be finite")
        dim = int(mat.shape[1]) if mat.shape[1] else 0
        index = cls(dim, metric, m, ef_construction, ef_search, seed)
        order = np.argsort(ids_arr, kind="stable")
        ids_arr = ids_arr[order]
        if np.any(ids_arr[1:] == ids_arr[:-1]):
            raise ValueError("duplicate ids")
        index._allocate(ids_arr, index._prepare_matrix(mat[order]))
        for pos in range(ids_arr.shape[0]):
            index._insert(pos)
        index._repair_connectivity()
        return index

    def _prepare_matrix(self, mat: np.ndarray) -> np.ndarray:
        mat = np.ascontiguousarray(mat, dtype=np.float64)
        if self.metric is Metric.COSINE and mat.shape[0]:
            norms = np.linalg.norm(mat, axis=1)
            if np.any(norms == 0.0):
                raise ValueError("cosine index cannot hold zero vectors")
            mat = np.ascontiguousarray(mat / norms[:, None])
        return mat

    def _prepare_query(self, q: Union[Vector, np.ndarray, list]) -> np.ndarray:
        qv = as_vector(q).as_array()
        if qv.shape[0] != self.dim:
            raise DimensionMismatchError(f"query dim {qv.shape[0]} != index dim {self.dim}")
        if self.metric is Metric.COSINE:
            norm = float(np.linalg.norm(qv))
            if norm == 0.0:
                raise ValueError("cosine query cannot be the zero vector")
            qv = qv / norm
        return np.ascontiguousarray(qv)

    def _allocate(self, ids: np.ndarray, data: np.ndarray) -> None:
        n = ids.shape[0]
        self.ids = ids
        self.data = data
        rng = np.random.default_rng(self.seed)
        ml = 1.0 / math.log(self.m)
        u = 1.0 - rng.random(n)  # in (0, 1]
        self.levels = np.floor(-np.log(u) * ml).astype(np.int32)
        top = int(self.levels.max()) if n else -1
        self.neighbors = [np.full((n, self.m), -1, dtype=np.int32) for _ in range(top + 1)]
        self.degrees = [np.zeros(n, dtype=np.int32) for _ in range(top + 1)]

    def _search(self, q: np.ndarray, entries: np.ndarray, ef: int, layer: int) -> tuple[np.ndarray, np.ndarray]:
        return kernels.search_layer(
            self.data, q, entries, ef, self.neighbors[layer], self.degrees[layer], self._code
        )

    def _insert(self, pos: int) -> None:
        level = int(self.levels[pos])
        if self.entry < 0:
            self.entry = pos
            self.max_level = level
            return
        q = self.data[pos]
        ep = np.array([self.entry], dtype=np.int64)
        for layer in range(self.max_level, level, -1):
            ids, _ = self._search(q, ep, 1, layer)
            ep = ids[:1]
        for layer in range(min(level, self.max_level), -1, -1):
            ids, dists = self._search(q, ep, self.ef_construction, layer)
            chosen = kernels.select_neighbors(self.data, ids, dists, self.m, self._code)
            nb, deg = self.neighbors[layer], self.degrees[layer]
            nb[pos, : chosen.shape[0]] = chosen
            deg[pos] = chosen.shape[0]
            for e in chosen.tolist():
                self._link(layer, e, pos)
            ep = ids
        if level > self.max_level:
            self.entry = pos
            self.max_level = level

    def _link(self, layer: int, src: int, dst: int) -> None:
        nb, deg = self.neighbors[layer], self.degrees[layer]
        d = int(deg[src])
        if d < self.m:
            nb[src, d] = dst
            deg[src] = d + 1
            return
        cands = np.append(nb[src, :d].astype(np.int64), dst)
        cd = kernels.distances(self.data, self.data[src], cands, self._code)
        order = np.lexsort((cands, cd))
        chosen = kernels.select_neighbors(self.data, cands[order], cd[order], self.m, self._code)
        nb[src, :] = -1
        nb[src, : chosen.shape[0]] = chosen
        deg[src] = chosen.shape[0]

    def _reachable(self) -> np.ndarray:
        n = self.ids.shape[0]
        seen = np.zeros(n, dtype=bool)
        if n == 0:
            return seen
        nb, deg = self.neighbors[0], self.degrees[0]
        seen[self.entry] = True
        queue = deque([self.entry])
        while queue:
            c = queue.popleft()
            for x in nb[c, : deg[c]].tolist():
                if not seen[x]:
                    seen[x] = True
                    queue.append(x)
        return seen

    def _repair_connectivity(self) -> None:
        """Add base-layer edges until every node is reachable from the entry."""
        n = self.ids.shape[0]
        nb, deg = self.neighbors[0] if n else None, self.degrees[0] if n else None
        for _ in range(2 * n + 1):
            seen = self._reachable()
            missing = np.flatnonzero(~seen)
            if missing.size == 0:
                return
            u = int(missing[0])
            reach = np.flatnonzero(seen).astype(np.int64)
            d = kernels.distances(self.data, self.data[u], reach, self._code)
            order = reach[np.lexsort((reach, d))]
            spare = [int(v) for v in order.tolist() if deg[v] < self.m]
            if spare:
                v = spare[0]
                nb[v, deg[v]] = u
                deg[v] += 1
                continue
            indeg = np.bincount(nb[nb >= 0].ravel(), minlength=n)
            replaced = False
            for v in order.tolist():
                row = nb[v, : deg[v]].tolist()
                # drop the furthest neighbour that stays reachable via another edge
                for slot in range(len(row) - 1, -1, -1):
                    if indeg[row[slot]] >= 2 and row[slot] != self.entry:
                        nb[v, slot] = u
                        replaced = True
                        break
                if replaced:
                    break
            if not replaced:
                raise RuntimeError("could not repair graph connectivity")
        if not self._reachable().all():
            raise RuntimeError("could not repair graph connectivity")

    # queries

    def __len__(self) -> int:
        return int(self.ids.shape[0])

    def search(
        self, q: Union[Vector, np.ndarray, list], k: int, ef: Optional[int] = None
    ) -> list[tuple[int, float]]:
        """Approximate top-``k`` as (id, distance), ascending.

        ``ef`` defaults to ``max(ef_search, k)``; an explicit ``ef < k`` is
        rejected.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        if ef is None:
            ef = max(self.ef_search, k)
        elif ef < k:
            raise ValueError(f"ef ({ef}) must be >= k ({k})")
        qv = self._prepare_query(q)
        if len(self) == 0:
            return []
        ep = np.array([self.entry], dtype=np.int64)
        for layer in range(self.max_level, 0, -1):
            ids, _ = self._search(qv, ep, 1, layer)
            ep = ids[:1]
        # reachability is guaranteed from the entry only, so seed it too
        if int(ep[0]) != self.entry:
            ep = np.array([int(ep[0]), self.entry], dtype=np.int64)
        ids, dists = self._search(qv, ep, ef, 0)
        return [(int(self.ids[i]), float(d)) for i, d in zip(ids[:k].tolist(), dists[:k].tolist())]

    def stats(self) -> IndexStats:
        n = len(self)
        return IndexStats(
            size=n,
            dim=self.dim,
            metric=self.metric,
            m=self.m,
            ef_construction=self.ef_construction,
            ef_search=self.ef_search,
            max_level=self.max_level,
            layer_sizes=tuple(int((self.levels >= layer).sum()) for layer in range(self.max_level + 1)),
            mean_degree=float(self.degrees[0].mean()) if n else 0.0,
            reachable=int(self._reachable().sum()),
            backend=kernels.BACKEND,
        )


def ann_search(
    index: AnnIndex, q: Union[Vector, np.ndarray, list], k: int, ef_search: Optional[int] = None
) -> list[tuple[int, float]]:
    return index.search(q, k, ef_search)
