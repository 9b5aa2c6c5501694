"""Embedder interface and vector normalization."""

from __future__ import annotations

import numpy as np

from ..errors import ZeroVectorError


class Embedder:
    """Maps text to a fixed-dimension vector; immutable after construction.

    Subclasses set ``dimension`` and ``kind`` and implement :meth:`embed`,
    which returns the raw (unnormalized) vector.
    """

    dimension: int
    kind: str

    def embed(self, text: str) -> np.ndarray:
        raise NotImplementedError

    def embed_normalized(self, text: str) -> np.ndarray | None:
        """Normalized embedding, or None when the raw embedding is zero."""
        vec = self.embed(text)
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            return None
        return vec / norm


def normalize(vector: np.ndarray) -> np.ndarray:
    """Scale to unit L2 norm; zero vectors are an error, callers keep them as-is."""
    vector = np.asarray(vector, dtype=np.float64)
    norm = float(np.linalg.norm(vector))
    if norm == 0.0:
        raise ZeroVectorError("cannot normalize zero narrative embedding")
    return vector / norm
