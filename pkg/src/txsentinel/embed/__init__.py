"""Text embedding: deterministic hashing default, file-based external override."""

from .base import Embedder, normalize
from .external import ExternalTableEmbedder, load_external_table
from .hashing import HashingEmbedder, fnv1a64, tokenize

__all__ = [
    "Embedder",
    "ExternalTableEmbedder",
    "HashingEmbedder",
    "fnv1a64",
    "load_external_table",
    "normalize",
    "tokenize",
]
