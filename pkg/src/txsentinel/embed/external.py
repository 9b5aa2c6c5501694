"""Exact-lookup embedder backed by a precomputed embedding table.

Table format: JSONL, one ``{"text": string, "vector": [D reals]}`` per line.
This is the hook for swapping in transformer embeddings computed offline;
lookups are exact by text key, unknown keys are an error.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import DimensionMismatchError, EmbeddingNotFoundError, ParseError
from .base import Embedder


class ExternalTableEmbedder(Embedder):
    kind = "external-table"

    def __init__(self, table: dict[str, np.ndarray], dimension: int):
        if not table:
            raise ValueError("external embedding table is empty")
        self.dimension = dimension
        self._table = table

    def __len__(self) -> int:
        return len(self._table)

    def embed(self, text: str) -> np.ndarray:
        vec = self._table.get(text)
        if vec is None:
            raise EmbeddingNotFoundError(f"embedding not found for text: {text!r}")
        return vec.copy()


def load_external_table(path: str | Path, dimension: int | None = None) -> ExternalTableEmbedder:
    """Load a JSONL embedding table; all vectors must share one dimension."""
    table: dict[str, np.ndarray] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"line {lineno}: malformed JSON: {exc}") from exc
            if not isinstance(obj, dict) or "text" not in obj or "vector" not in obj:
                raise ParseError(f"line {lineno}: expected object with text and vector")
            text = obj["text"]
            if text in table:
                raise ParseError(f"line {lineno}: duplicate text key: {text!r}", field="text")
            vec = np.asarray(obj["vector"], dtype=np.float64)
            if vec.ndim != 1:
                raise ParseError(f"line {lineno}: vector must be one-dimensional", field="vector")
            if dimension is None:
                dimension = vec.shape[0]
            if vec.shape[0] != dimension:
                raise DimensionMismatchError(
                    f"line {lineno}: vector length {vec.shape[0]} != {dimension}"
                )
            table[text] = vec
    if dimension is None:
        raise ValueError("external embedding table is empty")
    return ExternalTableEmbedder(table, dimension)
