"""Coordination strategies between the SQL predicate and the vector search."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional, Union

DEFAULT_MULTIPLIER = 4.0


@dataclass(frozen=True)
class PreFilter:
    """Filter (and join) first, then exact search over the survivors."""

    def __str__(self) -> str:
        return "pre"


@dataclass(frozen=True)
class PostFilter:
    """Graph search for k' candidates, then filter.

    Give either an absolute ``k_prime`` or a ``multiplier`` over k; with
    neither, k' = 4k.
    """

    k_prime: Optional[int] = None
    multiplier: Optional[float] = None

    def __post_init__(self) -> None:
        if self.k_prime is not None and self.multiplier is not None:
            raise ValueError("give k_prime or multiplier, not both")
        if self.k_prime is not None and self.k_prime < 1:
            raise ValueError("k_prime must be >= 1")
        if self.multiplier is not None and self.multiplier < 1:
            raise ValueError("multiplier must be >= 1")

    def candidates(self, k: int) -> int:
        if self.k_prime is not None:
            if self.k_prime < k:
                raise ValueError(f"k_prime ({self.k_prime}) must be >= k ({k})")
            return self.k_prime
        mult = DEFAULT_MULTIPLIER if self.multiplier is None else self.multiplier
        return max(k, math.ceil(mult * k - 1e-9))

    def __str__(self) -> str:
        if self.k_prime is not None:
            return f"post:{self.k_prime}"
        mult = DEFAULT_MULTIPLIER if self.multiplier is None else self.multiplier
        return f"post:x{mult:g}"


@dataclass(frozen=True)
class Iterative:
    """Repeated graph scans; scan i asks for k + (i - 1) * batch candidates."""

    batch: int = 10
    max_scans: int = 10

    def __post_init__(self) -> None:
        if self.batch < 1:
            raise ValueError("batch must be >= 1")
        if self.max_scans < 1:
            raise ValueError("max_scans must be >= 1")

    def schedule(self, k: int) -> list[int]:
        return [k + i * self.batch for i in range(self.max_scans)]

    def __str__(self) -> str:
        return f"iter:{self.batch},{self.max_scans}"


ExecStrategy = Union[PreFilter, PostFilter, Iterative]

_POST = re.compile(r"post(?::(x?)(\d+(?:\.\d+)?))?")
_ITER = re.compile(r"iter(?::(\d+),(\d+))?")


def parse_strategy(text: str) -> ExecStrategy:
    """Parse ``pre``, ``post``, ``post:K``, ``post:xM`` or ``iter:BATCH,MAX``."""
    t = text.strip().lower()
    if t == "pre":
        return PreFilter()
    m = _POST.fullmatch(t)
    if m:
        if m.group(2) is None:
            return PostFilter()
        if m.group(1):
            return PostFilter(multiplier=float(m.group(2)))
        if "." in m.group(2):
            raise ValueError(f"k' must be an integer: {text!r}")
        return PostFilter(k_prime=int(m.group(2)))
    m = _ITER.fullmatch(t)
    if m:
        if m.group(1) is None:
            return Iterative()
        return Iterative(int(m.group(1)), int(m.group(2)))
    raise ValueError(f"unrecognised strategy {text!r}")
