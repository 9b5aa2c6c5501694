"""Regulatory clause retrieval: embedding index, exact top-k, query building."""

from importlib import resources
from pathlib import Path

from .index import (
    ClauseIndex,
    RegulatoryClause,
    RetrievedClause,
    build_index,
    load_corpus,
    load_index,
    query_top_k,
    save_index,
)
from .query import (
    FALLBACK_QUERY_TEXT,
    FlagThresholds,
    query_embedding,
    query_text,
    structural_flags,
    thresholds_from_graph,
)


def default_corpus_path() -> Path:
    """Path of the bundled synthetic AML-style starter corpus."""
    return Path(str(resources.files("txsentinel") / "data" / "aml_clauses.jsonl"))


__all__ = [
    "FALLBACK_QUERY_TEXT",
    "ClauseIndex",
    "FlagThresholds",
    "RegulatoryClause",
    "RetrievedClause",
    "build_index",
    "default_corpus_path",
    "load_corpus",
    "load_index",
    "query_embedding",
    "query_text",
    "query_top_k",
    "save_index",
    "structural_flags",
    "thresholds_from_graph",
]
