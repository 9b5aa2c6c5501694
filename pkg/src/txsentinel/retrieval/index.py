"""Regulatory clause index: shared-space embeddings, exact cosine top-k.

The index is a plain matrix scan. Corpora here are rulebooks of at most a
few hundred clauses, so exactness is free; approximate structures are
explicitly out of scope.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..embed.base import Embedder
from ..errors import CorpusError, DimensionMismatchError, ParseError


@dataclass(frozen=True)
class RegulatoryClause:
    clause_id: str
    source: str
    text: str
    embedding: np.ndarray = field(repr=False)  # normalized, length D


@dataclass(frozen=True)
class RetrievedClause:
    clause_id: str
    source: str
    text: str
    similarity: float


@dataclass
class ClauseIndex:
    """Immutable after construction; any number of concurrent queries is safe."""

    dimension: int
    clauses: list[RegulatoryClause]
    _matrix: np.ndarray = field(repr=False)  # (n, D), rows normalized

    @property
    def size(self) -> int:
        return len(self.clauses)


def load_corpus(path: str | Path) -> list[dict]:
    """Read a clause corpus: JSONL of {"clause_id", "source", "text"}."""
    records: list[dict] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"line {lineno}: malformed JSON: {exc}") from exc
            for key in ("clause_id", "source", "text"):
                if key not in obj or not isinstance(obj[key], str):
                    raise ParseError(f"line {lineno}: missing or non-string {key}", field=key)
            records.append({k: obj[k] for k in ("clause_id", "source", "text")})
    return records


def build_index(corpus: list[dict], embedder: Embedder) -> ClauseIndex:
    """Embed and normalize every clause with the shared embedder."""
    if not corpus:
        raise CorpusError("empty corpus")
    seen: set[str] = set()
    clauses: list[RegulatoryClause] = []
    for record in corpus:
        clause_id = record["clause_id"]
        if clause_id in seen:
            raise CorpusError(f"duplicate clause_id: {clause_id}")
        seen.add(clause_id)
        embedding = embedder.embed_normalized(record["text"])
        if embedding is None:
            raise CorpusError(f"clause {clause_id} embeds to the zero vector")
        clauses.append(
            RegulatoryClause(
                clause_id=clause_id,
                source=record["source"],
                text=record["text"],
                embedding=embedding,
            )
        )
    matrix = np.stack([c.embedding for c in clauses])
    return ClauseIndex(dimension=embedder.dimension, clauses=clauses, _matrix=matrix)


def query_top_k(index: ClauseIndex, query: np.ndarray, k: int) -> list[RetrievedClause]:
    """Exact top-k by cosine similarity; ties broken by ascending clause_id.

    ``query`` must be normalized, so cosine reduces to the inner product.
    Returns fewer than k entries only when the corpus is smaller than k.
    """
    if k <= 0:
        raise ValueError("k must be >= 1")
    query = np.asarray(query, dtype=np.float64)
    if query.shape != (index.dimension,):
        raise DimensionMismatchError(
            f"query dimension {query.shape} != index dimension ({index.dimension},)"
        )
    sims = index._matrix @ query
    ranked = sorted(
        range(index.size), key=lambda i: (-sims[i], index.clauses[i].clause_id)
    )[:k]
    return [
        RetrievedClause(
            clause_id=index.clauses[i].clause_id,
            source=index.clauses[i].source,
            text=index.clauses[i].text,
            similarity=float(sims[i]),
        )
        for i in ranked
    ]


# ------------------------------------------------------- index file artifact


def save_index(index: ClauseIndex, path: str | Path) -> None:
    """Persist a built index (embeddings included) as a JSON artifact."""
    payload = {
        "dimension": index.dimension,
        "clauses": [
            {
                "clause_id": c.clause_id,
                "source": c.source,
                "text": c.text,
                "embedding": c.embedding.tolist(),
            }
            for c in index.clauses
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_index(path: str | Path) -> ClauseIndex:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    dimension = int(payload["dimension"])
    clauses = []
    for rec in payload["clauses"]:
        embedding = np.asarray(rec["embedding"], dtype=np.float64)
        if embedding.shape != (dimension,):
            raise DimensionMismatchError(
                f"clause {rec['clause_id']} embedding length {embedding.shape} != {dimension}"
            )
        clauses.append(
            RegulatoryClause(
                clause_id=rec["clause_id"],
                source=rec["source"],
                text=rec["text"],
                embedding=embedding,
            )
        )
    if not clauses:
        raise CorpusError("empty corpus")
    matrix = np.stack([c.embedding for c in clauses])
    return ClauseIndex(dimension=dimension, clauses=clauses, _matrix=matrix)
