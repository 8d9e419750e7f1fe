"""Canonical JSON for the domain types and AST nodes.

Encoding rules:

* a dataclass becomes an object with ``"_type": <class name>`` plus one key
  per field (field names are the stable contract; ``pos`` is kept when set);
* an enum member becomes ``{"_enum": <enum class>, "value": <value>}``;
* tuples become arrays and are decoded back into tuples;
* scalars (str, int, float, bool, null) are emitted as-is.

``dumps`` sorts keys and uses compact separators, so equal values always
produce byte-identical text.
"""

from __future__ import annotations

import json
from dataclasses import fields, is_dataclass
from enum import Enum
from typing import Any

from . import ast as A
from . import model

_TYPES: dict[str, type] = {}
_ENUMS: dict[str, type] = {}


def register(cls: type) -> type:
    """Make ``cls`` (a dataclass or Enum) decodable by name."""
    if issubclass(cls, Enum):
        _ENUMS[cls.__name__] = cls
    else:
        _TYPES[cls.__name__] = cls
    return cls


for _mod in (model, A):
    for _obj in vars(_mod).values():
        if isinstance(_obj, type) and _obj.__module__ == _mod.__name__:
            if issubclass(_obj, Enum) or is_dataclass(_obj):
                register(_obj)


def to_json(obj: Any) -> Any:
    if isinstance(obj, Enum):
        return {"_enum": type(obj).__name__, "value": obj.value}
    if is_dataclass(obj) and not isinstance(obj, type):
        out: dict[str, Any] = {"_type": type(obj).__name__}
        for f in fields(obj):
            value = getattr(obj, f.name)
            if f.name == "pos" and value is None:
                continue
            out[f.name] = to_json(value)
        return out
    if isinstance(obj, (tuple, list)):
        return [to_json(x) for x in obj]
    if isinstance(obj, dict):
        return {str(k): to_json(v) for k, v in obj.items()}
    if obj is None or isinstance(obj, (str, bool, int, float)):
        return obj
    if hasattr(obj, "item"):  # numpy scalar
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def from_json(data: Any) -> Any:
    if isinstance(data, list):
        return tuple(from_json(x) for x in data)
    if isinstance(data, dict):
        if "_enum" in data:
            return _ENUMS[data["_enum"]](data["value"])
        if "_type" in data:
            cls = _TYPES.get(data["_type"])
            if cls is None:
                raise ValueError(f"unknown type tag {data['_type']!r}")
            kwargs = {k: from_json(v) for k, v in data.items() if k != "_type"}
            return cls(**kwargs)
        return {k: from_json(v) for k, v in data.items()}
    return data


def dumps(obj: Any) -> str:
    return json.dumps(to_json(obj), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def loads(text: str) -> Any:
    return from_json(json.loads(text))
