"""Deterministic signed feature-hashing text embedder.

The embedding rule, exactly:

1. lowercase the text;
2. split into words = maximal runs of ASCII alphanumerics;
3. token set = every word, plus every contiguous 3-character window of each
   word of length >= 3, prefixed with ``"3#"`` to keep the two token spaces
   apart;
4. hash each token's UTF-8 bytes with 64-bit FNV-1a; add ``+1`` at position
   ``hash % dimension`` when bit 0 of the hash is 0, else ``-1``.

Pure function of the text: no state, no randomness, no network.
"""

from __future__ import annotations

import re

import numpy as np

from .base import Embedder

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF

_WORD_RE = re.compile(r"[a-z0-9]+")


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def tokenize(text: str) -> list[str]:
    """Word unigrams plus tagged character trigrams, per the module rule."""
    words = _WORD_RE.findall(text.lower())
    tokens = list(words)
    for word in words:
        if len(word) >= 3:
            tokens.extend("3#" + word[i : i + 3] for i in range(len(word) - 2))
    return tokens


class HashingEmbedder(Embedder):
    """Signed-hashing embedder with a small text -> vector cache."""

    kind = "hashing"

    def __init__(self, dimension: int = 64):
        if dimension <= 0:
            raise ValueError("embedding dimension must be positive")
        self.dimension = dimension
        self._cache: dict[str, np.ndarray] = {}

    def embed(self, text: str) -> np.ndarray:
        cached = self._cache.get(text)
        if cached is not None:
            return cached.copy()
        vec = np.zeros(self.dimension, dtype=np.float64)
        for token in tokenize(text):
            h = fnv1a64(token.encode("utf-8"))
            sign = 1.0 if (h & 1) == 0 else -1.0
            vec[h % self.dimension] += sign
        self._cache[text] = vec
        return vec.copy()
