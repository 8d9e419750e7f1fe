"""Text embedders.

The default is a dependency-free hashing embedder: each word unigram and
character trigram seeds a fixed Gaussian direction, the directions are summed
and the sum is L2-normalised. Real encoders plug in through :class:`Embedder`.
"""

from __future__ import annotations

import hashlib
import re
from functools import lru_cache
from typing import Protocol, runtime_checkable

import numpy as np

from .model import Vector

_WORD = re.compile(r"[a-z0-9]+")
EMPTY_SENTINEL = "\x00<empty>"


@runtime_checkable
class Embedder(Protocol):
    id: str
    dim: int

    def embed(self, text: str) -> Vector: ...

    def embed_array(self, text: str) -> np.ndarray: ...


def text_features(text: str) -> list[str]:
    words = _WORD.findall(text.lower())
    feats = ["w:" + w for w in words]
    padded = " " + " ".join(words) + " "
    if words:
        feats += ["c:" + padded[i : i + 3] for i in range(len(padded) - 2)]
    return feats


class HashEmbedder:
    """Deterministic bag-of-features projection; ``embed('')`` is a fixed unit vector."""

    def __init__(self, dim: int = 64, seed: int = 0) -> None:
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = dim
        self.seed = seed
        self.id = "hash64" if (dim, seed) == (64, 0) else f"hash{dim}s{seed}"
        self._direction = lru_cache(maxsize=1 << 16)(self._make_direction)
        self._cached = lru_cache(maxsize=1 << 14)(self._compute)

    def _make_direction(self, feature: str) -> np.ndarray:
        digest = hashlib.blake2b(f"{self.seed}\x1f{feature}".encode(), digest_size=8).digest()
        rng = np.random.default_rng(int.from_bytes(digest, "little"))
        return rng.standard_normal(self.dim)

    def _compute(self, text: str) -> np.ndarray:
        feats = text_features(text) or [EMPTY_SENTINEL]
        acc = np.zeros(self.dim)
        for f in feats:
            acc += self._direction(f)
        norm = float(np.linalg.norm(acc))
        if norm == 0.0:
            acc = self._direction(EMPTY_SENTINEL)
            norm = float(np.linalg.norm(acc))
        out = acc / norm
        out.setflags(write=False)
        return out

    def embed_array(self, text: str) -> np.ndarray:
        return self._cached(text)

    def embed(self, text: str) -> Vector:
        return Vector(tuple(self._cached(text).tolist()))

    def embed_many(self, texts: list[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dim))
        return np.vstack([self._cached(t) for t in texts])


def default_embedder(embedder_id: str = "hash64", dim: int = 64) -> HashEmbedder:
    """Resolve an embedder id recorded on a vector column."""
    m = re.fullmatch(r"hash(\d+)(?:s(\d+))?", embedder_id)
    if m is None:
        raise KeyError(f"no built-in embedder {embedder_id!r}; pass one explicitly")
    d, s = int(m.group(1)), int(m.group(2) or 0)
    if d != dim:
        raise ValueError(f"embedder {embedder_id!r} has dim {d}, column expects {dim}")
    return HashEmbedder(d, s)
