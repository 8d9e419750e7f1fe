"""Binary snapshot of an :class:`AnnIndex`.

Layout, all little-endian, in this order:

========  =========  ==========================================
offset    type       field
========  =========  ==========================================
0         8 bytes    magic ``VSQLHNSW``
8         u32        format version (currently 1)
12        u32        metric code (0 = l2, 1 = cosine, 2 = dot)
16        u32        dim
20        u32        node count ``n``
24        u32        max degree ``m``
28        u32        ef_construction
32        u32        ef_search
36        i32        max level (-1 when empty)
40        i32        entry position (-1 when empty)
44        u64        level-assignment seed
52        i64[n]     external ids, ascending
...       f64[n*dim] stored vectors, row-major (unit rows for cosine)
...       i32[n]     node levels
...       per layer 0..max_level: i32[n] degrees, then i32[n*m]
                     neighbour positions padded with -1
========  =========  ==========================================
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import BinaryIO, Union

import numpy as np

from ..errors import SnapshotFormatError
from .hnsw import CODE_METRICS, METRIC_CODES, AnnIndex

MAGIC = b"VSQLHNSW"
VERSION = 1
_HEADER = struct.Struct("<8sIIIIIIIiiQ")


def write_index(index: AnnIndex, fh: BinaryIO) -> None:
    n = len(index)
    fh.write(
        _HEADER.pack(
            MAGIC,
            VERSION,
            METRIC_CODES[index.metric],
            index.dim,
            n,
            index.m,
            index.ef_construction,
            index.ef_search,
            index.max_level,
            index.entry,
            index.seed,
        )
    )
    fh.write(index.ids.astype("<i8").tobytes())
    fh.write(index.data.astype("<f8").tobytes())
    fh.write(index.levels.astype("<i4").tobytes())
    for layer in range(index.max_level + 1):
        fh.write(index.degrees[layer].astype("<i4").tobytes())
        fh.write(index.neighbors[layer].astype("<i4").tobytes())


def _take(buf: bytes, offset: int, dtype: str, count: int) -> tuple[np.ndarray, int]:
    size = np.dtype(dtype).itemsize * count
    if offset + size > len(buf):
        raise SnapshotFormatError("truncated index snapshot")
    arr = np.frombuffer(buf, dtype=dtype, count=count, offset=offset)
    return arr, offset + size


def read_index(fh: BinaryIO) -> AnnIndex:
    buf = fh.read()
    if len(buf) < _HEADER.size:
        raise SnapshotFormatError("truncated index header")
    magic, version, code, dim, n, m, efc, efs, max_level, entry, seed = _HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise SnapshotFormatError("not an index snapshot")
    if version != VERSION:
        raise SnapshotFormatError(f"unsupported snapshot version {version}")
    if code not in CODE_METRICS:
        raise SnapshotFormatError(f"unknown metric code {code}")
    index = AnnIndex(dim, CODE_METRICS[code], m, efc, efs, seed)
    off = _HEADER.size
    ids, off = _take(buf, off, "<i8", n)
    data, off = _take(buf, off, "<f8", n * dim)
    levels, off = _take(buf, off, "<i4", n)
    index.ids = ids.astype(np.int64)
    index.data = np.ascontiguousarray(data.astype(np.float64).reshape(n, dim))
    index.levels = levels.astype(np.int32)
    index.neighbors, index.degrees = [], []
    for _ in range(max_level + 1):
        deg, off = _take(buf, off, "<i4", n)
        nb, off = _take(buf, off, "<i4", n * m)
        index.degrees.append(deg.astype(np.int32))
        index.neighbors.append(np.ascontiguousarray(nb.astype(np.int32).reshape(n, m)))
    if off != len(buf):
        raise SnapshotFormatError("trailing bytes in index snapshot")
    index.max_level = max_level
    index.entry = entry
    return index


def save_index(index: AnnIndex, path: Union[str, Path]) -> None:
    with open(path, "wb") as fh:
        write_index(index, fh)


def load_index(path: Union[str, Path]) -> AnnIndex:
    with open(path, "rb") as fh:
        return read_index(fh)
