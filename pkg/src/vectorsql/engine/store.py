"""In-memory hybrid store: relational rows plus per-column vector indexes.

Snapshot layout (a directory)::

    store.json                 schema, index parameters and scalar rows
    <table>.<column>.npy       float64 matrix, rows aligned with the table's ids
    <table>.<column>.idx       graph index (see ``vectorsql.index.snapshot``)

Index files are optional; missing ones are rebuilt lazily on first use.
"""

from __future__ import annotations

import json
import threading
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from ..errors import DimensionMismatchError, SnapshotFormatError
from ..index.exact import ExactStore
from ..index.hnsw import DEFAULT_EF_CONSTRUCTION, DEFAULT_EF_SEARCH, DEFAULT_M, AnnIndex
from ..index.snapshot import load_index, save_index
from ..model import HybridSchema, ScalarType, TableDef
from ..serialize import from_json, to_json

STORE_FORMAT = "vectorsql-store"
STORE_VERSION = 1


@dataclass(frozen=True)
class IndexParams:
    m: int = DEFAULT_M
    ef_construction: int = DEFAULT_EF_CONSTRUCTION
    ef_search: int = DEFAULT_EF_SEARCH
    seed: int = 0


@dataclass
class TableData:
    table: TableDef
    ids: list[int]
    rows: list[tuple]
    vectors: dict[str, ExactStore] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.position = {rid: i for i, rid in enumerate(self.ids)}


def _coerce(value: Any, kind: ScalarType, where: str) -> Any:
    if value is None:
        return None
    if kind is ScalarType.INTEGER:
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            raise TypeError(f"{where}: expected integer, got {value!r}")
        return int(value)
    if kind is ScalarType.REAL:
        if isinstance(value, bool) or not isinstance(value, (int, float, np.integer, np.floating)):
            raise TypeError(f"{where}: expected real, got {value!r}")
        return float(value)
    if kind is ScalarType.TEXT:
        if not isinstance(value, str):
            raise TypeError(f"{where}: expected text, got {value!r}")
        return value
    if not isinstance(value, (bool, np.bool_)):
        raise TypeError(f"{where}: expected boolean, got {value!r}")
    return bool(value)


class HybridStore:
    """Rows keyed by primary key, with exact and graph indexes per vector column.

    Immutable once constructed except for lazily built graph indexes, which
    are created under a lock so concurrent queries are safe.
    """

    def __init__(
        self,
        schema: HybridSchema,
        tables: Mapping[str, TableData],
        params: IndexParams = IndexParams(),
        indexes: Optional[Mapping[tuple[str, str], AnnIndex]] = None,
    ) -> None:
        self.schema = schema
        self.tables = dict(tables)
        self.params = params
        self._indexes: dict[tuple[str, str], AnnIndex] = dict(indexes or {})
        self._lock = threading.Lock()
        for t in schema.tables:
            if t.name not in self.tables:
                raise ValueError(f"missing rows for table {t.name!r}")
            data = self.tables[t.name]
            for vc in t.vector_columns:
                ex = data.vectors.get(vc.name)
                if ex is None:
                    raise ValueError(f"missing vectors for {t.name}.{vc.name}")
                if len(ex) and ex.dim != vc.dim:
                    raise DimensionMismatchError(f"{t.name}.{vc.name}: vectors have dim {ex.dim}, declared {vc.dim}")
                if ex.ids.tolist() != data.ids:
                    raise ValueError(f"{t.name}.{vc.name}: vector ids differ from row ids")

    @classmethod
    def from_rows(
        cls,
        schema: HybridSchema,
        rows: Mapping[str, Iterable[Union[Mapping[str, Any], Sequence[Any]]]],
        vectors: Optional[Mapping[tuple[str, str], Mapping[int, Any]]] = None,
        params: IndexParams = IndexParams(),
    ) -> "HybridStore":
        """Build a store from scalar rows (dicts or column-ordered tuples) and vectors."""
        vectors = vectors or {}
        tables: dict[str, TableData] = {}
        for t in schema.tables:
            names = [c.name for c in t.columns]
            pk = t.column_index(t.primary_key)
            decoded: list[tuple] = []
            for raw in rows.get(t.name, ()):
                if isinstance(raw, Mapping):
                    unknown = set(raw) - set(names)
                    if unknown:
                        raise ValueError(f"{t.name}: unknown columns {sorted(unknown)}")
                    values = [raw.get(n) for n in names]
                else:
                    values = list(raw)
                    if len(values) != len(names):
                        raise ValueError(f"{t.name}: expected {len(names)} values, got {len(values)}")
                decoded.append(
                    tuple(_coerce(v, c.type, f"{t.name}.{c.name}") for v, c in zip(values, t.columns))
                )
            decoded.sort(key=lambda r: (r[pk] is None, r[pk]))
            ids = [r[pk] for r in decoded]
            if any(i is None for i in ids):
                raise ValueError(f"{t.name}: primary key may not be NULL")
            if len(set(ids)) != len(ids):
                raise ValueError(f"{t.name}: duplicate primary key")
            ex_stores: dict[str, ExactStore] = {}
            for vc in t.vector_columns:
                given = vectors.get((t.name, vc.name))
                if given is None:
                    raise ValueError(f"missing vectors for {t.name}.{vc.name}")
                if set(given) != set(ids):
                    raise ValueError(f"{t.name}.{vc.name}: vector ids differ from row ids")
                mat = np.zeros((len(ids), vc.dim))
                for i, rid in enumerate(ids):
                    v = np.asarray(given[rid].components if hasattr(given[rid], "components") else given[rid], dtype=np.float64)
                    if v.shape != (vc.dim,):
                        raise DimensionMismatchError(f"{t.name}.{vc.name}[{rid}]: dim {v.shape}, declared {vc.dim}")
                    mat[i] = v
                ex_stores[vc.name] = ExactStore(ids, mat, vc.metric)
            tables[t.name] = TableData(t, ids, decoded, ex_stores)
        return cls(schema, tables, params)

    def table(self, name: str) -> TableData:
        return self.tables[name]

    def exact(self, table: str, column: str) -> ExactStore:
        return self.tables[table].vectors[column]

    def index(self, table: str, column: str) -> AnnIndex:
        key = (table, column)
        idx = self._indexes.get(key)
        if idx is not None:
            return idx
        with self._lock:
            idx = self._indexes.get(key)
            if idx is None:
                ex = self.exact(table, column)
                p = self.params
                idx = AnnIndex.build(ex.ids, ex.matrix, ex.metric, p.m, p.ef_construction, p.ef_search, p.seed)
                self._indexes[key] = idx
        return idx

    def build_indexes(self) -> None:
        for t in self.schema.tables:
            for vc in t.vector_columns:
                self.index(t.name, vc.name)

    def has_index(self, table: str, column: str) -> bool:
        return (table, column) in self._indexes

    # snapshots

    def save(self, path: Union[str, Path], include_indexes: bool = True) -> None:
        root = Path(path)
        root.mkdir(parents=True, exist_ok=True)
        doc = {
            "format": STORE_FORMAT,
            "version": STORE_VERSION,
            "schema": to_json(self.schema),
            "index_params": asdict(self.params),
            "tables": {
                name: {"ids": data.ids, "rows": [list(r) for r in data.rows]}
                for name, data in sorted(self.tables.items())
            },
        }
        (root / "store.json").write_text(json.dumps(doc, sort_keys=True, ensure_ascii=False))
        for t in self.schema.tables:
            for vc in t.vector_columns:
                np.save(root / f"{t.name}.{vc.name}.npy", self.exact(t.name, vc.name).matrix, allow_pickle=False)
                if include_indexes and self.has_index(t.name, vc.name):
                    save_index(self._indexes[(t.name, vc.name)], root / f"{t.name}.{vc.name}.idx")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "HybridStore":
        root = Path(path)
        try:
            doc = json.loads((root / "store.json").read_text())
        except FileNotFoundError as exc:
            raise SnapshotFormatError(f"no store.json under {root}") from exc
        if doc.get("format") != STORE_FORMAT or doc.get("version") != STORE_VERSION:
            raise SnapshotFormatError("unrecognised store snapshot")
        schema = from_json(doc["schema"])
        params = IndexParams(**doc["index_params"])
        tables: dict[str, TableData] = {}
        indexes: dict[tuple[str, str], AnnIndex] = {}
        for t in schema.tables:
            raw = doc["tables"][t.name]
            ids = [int(i) for i in raw["ids"]]
            rows = [tuple(_coerce(v, c.type, t.name) for v, c in zip(r, t.columns)) for r in raw["rows"]]
            ex_stores = {}
            for vc in t.vector_columns:
                mat = np.load(root / f"{t.name}.{vc.name}.npy", allow_pickle=False)
                if len(ids) == 0:
                    mat = np.zeros((0, vc.dim))
                ex_stores[vc.name] = ExactStore(ids, mat, vc.metric)
                idx_path = root / f"{t.name}.{vc.name}.idx"
                if idx_path.exists():
                    indexes[(t.name, vc.name)] = load_index(idx_path)
            tables[t.name] = TableData(t, ids, rows, ex_stores)
        return cls(schema, tables, params, indexes)
