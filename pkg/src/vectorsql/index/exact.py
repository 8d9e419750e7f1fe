"""Exact brute-force k-nearest-neighbour search (the recall oracle).

Deliberately written in plain numpy, independent of the graph kernels.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Optional, Union

import numpy as np

from ..errors import DimensionMismatchError
from ..model import Metric, Vector, as_vector


def metric_distances(matrix: np.ndarray, q: np.ndarray, metric: Metric) -> np.ndarray:
    """Distances from ``q`` to every row of ``matrix``; smaller is closer.

    Cosine becomes ``1 - cos`` and dot product becomes ``-dot``.
    """
    if metric is Metric.L2:
        diff = matrix - q
        return np.sqrt(np.sum(diff * diff, axis=1))
    dots = matrix @ q
    if metric is Metric.DOT:
        return -dots
    qn = float(np.linalg.norm(q))
    norms = np.linalg.norm(matrix, axis=1)
    if qn == 0.0 or (norms.size and np.any(norms == 0.0)):
        raise ValueError("cosine distance is undefined for zero vectors")
    return 1.0 - dots / (norms * qn)


class ExactStore:
    """Row-aligned vectors keyed by integer id, sorted by id."""

    def __init__(self, ids: Iterable[int], matrix: np.ndarray, metric: Metric = Metric.L2) -> None:
        ids_arr = np.asarray(list(ids), dtype=np.int64)
        matrix = np.ascontiguousarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != ids_arr.shape[0]:
            raise ValueError("matrix rows must align with ids")
        order = np.argsort(ids_arr, kind="stable")
        self.ids = ids_arr[order]
        if np.any(self.ids[1:] == self.ids[:-1]):
            raise ValueError("duplicate ids")
        self.matrix = matrix[order]
        self.metric = Metric(metric)
        self.positions = {int(i): p for p, i in enumerate(self.ids.tolist())}

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1])

    def __len__(self) -> int:
        return int(self.ids.shape[0])

    def vector(self, row_id: int) -> np.ndarray:
        return self.matrix[self.positions[row_id]]

    @classmethod
    def from_mapping(cls, store: Mapping[int, Union[Vector, np.ndarray, list]], metric: Metric = Metric.L2) -> "ExactStore":
        ids = sorted(store)
        if not ids:
            return cls([], np.zeros((0, 1)), metric)
        rows = [as_vector(store[i]).as_array() for i in ids]
        dims = {r.shape[0] for r in rows}
        if len(dims) != 1:
            raise DimensionMismatchError("stored vectors have differing dims")
        return cls(ids, np.vstack(rows), metric)

    def distances(self, q: np.ndarray, positions: Optional[np.ndarray] = None) -> np.ndarray:
        # always over the full matrix: BLAS rounding can depend on a row's
        # place in the batch, and a row's distance must not depend on the subset
        d = metric_distances(self.matrix, q, self.metric)
        return d if positions is None else d[positions]


def knn_exact(
    store: Union[ExactStore, Mapping[int, Union[Vector, np.ndarray, list]]],
    q: Union[Vector, np.ndarray, list],
    k: int,
    subset: Optional[Iterable[int]] = None,
    metric: Optional[Metric] = None,
) -> list[tuple[int, float]]:
    """Top-``k`` ids by ascending distance (ties by ascending id).

    ``subset`` restricts the candidates (pre-filtering); ids absent from the
    store are ignored.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not isinstance(store, ExactStore):
        store = ExactStore.from_mapping(store, metric or Metric.L2)
    metric = Metric(metric) if metric is not None else store.metric
    qv = as_vector(q).as_array()
    if len(store) == 0:
        return []
    if qv.shape[0] != store.dim:
        raise DimensionMismatchError(f"query dim {qv.shape[0]} != store dim {store.dim}")
    if subset is None:
        positions = np.arange(len(store))
    else:
        positions = np.asarray(sorted(store.positions[i] for i in set(subset) if i in store.positions), dtype=np.int64)
        if positions.size == 0:
            return []
    d = metric_distances(store.matrix, qv, metric)[positions]
    ids = store.ids[positions]
    order = np.lexsort((ids, d))[:k]
    return [(int(ids[o]), float(d[o])) for o in order]
