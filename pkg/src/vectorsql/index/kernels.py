"""Select the graph-search kernel backend at import time.

The compiled extension is used when it was built; otherwise, or when
``VECTORSQL_PURE_PYTHON=1`` is set, the numpy twin is used.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _kernels_py


def _load() -> ModuleType:
    if os.environ.get("VECTORSQL_PURE_PYTHON", "") not in ("", "0"):
        return _kernels_py
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        return _kernels_py
    return _kernels


_impl = _load()

BACKEND: str = _impl.BACKEND
distances = _impl.distances
search_layer = _impl.search_layer
select_neighbors = _impl.select_neighbors


def available_backends() -> dict[str, ModuleType]:
    out: dict[str, ModuleType] = {"python": _kernels_py}
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        return out
    out["cython"] = _kernels
    return out
